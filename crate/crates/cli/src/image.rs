use std::path::PathBuf;

use clap::Args;
use reco_core::imaging::{
    contrast_stretch, default_faults, fixture_image, ssim, ssim_rows, stretch_reference, GrayImage,
    Mode, StretchParams, DEFAULT_LENGTH,
};
use serde::Serialize;

use crate::Failure;

#[derive(Args)]
pub struct ImageArgs {
    /// Input PGM; the built-in 128x128 fixture when absent.
    input: Option<PathBuf>,
    /// Error rate of the multiplier-stage gates.
    #[arg(long, default_value_t = 0.2)]
    pe: f64,
    /// clean, faulty or reco.
    #[arg(long, default_value = "reco")]
    mode: Mode,
    /// Bitstream length per pixel.
    #[arg(long, default_value_t = DEFAULT_LENGTH)]
    length: usize,
    /// Input range to stretch; the image range when absent.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    input_range: Option<Vec<u8>>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0u8, 255])]
    output_range: Vec<u8>,
    /// Where to write the stretched image.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-row SSIM as CSV.
    #[arg(long)]
    ssim_csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report {
    mode: Mode,
    p_e: f64,
    seed: u64,
    params: StretchParams,
    ssim: f64,
    mean_abs_diff: f64,
    levels_corrected: usize,
}

pub fn run(a: &ImageArgs, seed: u64) -> Result<(), Failure> {
    let img = match &a.input {
        Some(path) => {
            let f = std::fs::File::open(path).map_err(|e| Failure::io(path, e))?;
            GrayImage::read_pgm(std::io::BufReader::new(f))?
        }
        None => fixture_image(128),
    };
    let (in_lo, in_hi) = match &a.input_range {
        Some(r) => (r[0], r[1]),
        None => img.range(),
    };
    let params = StretchParams::new(in_lo, in_hi, a.output_range[0], a.output_range[1], a.length)?;
    let faults = default_faults(a.pe)?;
    let out = contrast_stretch(&img, &params, &faults, a.mode, seed)?;
    let truth = stretch_reference(&img, &params);
    if let Some(path) = &a.out {
        let f = std::fs::File::create(path).map_err(|e| Failure::io(path, e))?;
        out.image
            .write_pgm(std::io::BufWriter::new(f))
            .map_err(|e| Failure::io(path, e))?;
    }
    if let Some(path) = &a.ssim_csv {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["row", "ssim"])?;
        for (i, s) in ssim_rows(&out.image, &truth)?.iter().enumerate() {
            w.serialize((i, s))?;
        }
        w.flush().map_err(|e| Failure::io(path, e))?;
    }
    let report = Report {
        mode: a.mode,
        p_e: a.pe,
        seed,
        params,
        ssim: ssim(&out.image, &truth)?,
        mean_abs_diff: out.image.mean_abs_diff(&truth)?,
        levels_corrected: out.corrections.len(),
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}
