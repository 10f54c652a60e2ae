//! Contrast stretching through a faulty stochastic circuit, and image
//! similarity scoring.

mod ssim;
mod stretch;

use std::io::{BufRead, Seek, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ImageEncoder, ImageFormat};

use crate::error::{Error, Result};

pub use ssim::{ssim, ssim_rows, SSIM_WINDOW};
pub use stretch::{
    contrast_stretch, default_faults, stretch_circuit, stretch_reference, LevelCorrection, Mode,
    StretchOutput, StretchParams, DEFAULT_LENGTH,
};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::Image(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn inverted(&self) -> GrayImage {
        GrayImage {
            pixels: self.pixels.iter().map(|&p| 255 - p).collect(),
            ..self.clone()
        }
    }

    /// Darkest and brightest levels.
    pub fn range(&self) -> (u8, u8) {
        let lo = *self.pixels.iter().min().expect("non-empty");
        let hi = *self.pixels.iter().max().expect("non-empty");
        (lo, hi)
    }

    pub fn mean_abs_diff(&self, other: &GrayImage) -> Result<f64> {
        self.check_same_size(other)?;
        let sum: u64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| a.abs_diff(b) as u64)
            .sum();
        Ok(sum as f64 / self.pixels.len() as f64)
    }

    pub(crate) fn check_same_size(&self, other: &GrayImage) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::Image(format!(
                "size mismatch: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    pub fn read_pgm<R: BufRead + Seek>(reader: R) -> Result<Self> {
        let img = image::load(reader, ImageFormat::Pnm).map_err(|e| Error::Image(e.to_string()))?;
        let gray = img.to_luma8();
        let (w, h) = gray.dimensions();
        Self::new(w as usize, h as usize, gray.into_raw())
    }

    /// Binary (P5) graymap.
    pub fn write_pgm<W: Write>(&self, writer: W) -> Result<()> {
        PnmEncoder::new(writer)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(
                &self.pixels,
                self.width as u32,
                self.height as u32,
                image::ExtendedColorType::L8,
            )
            .map_err(|e| Error::Image(e.to_string()))
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Image(format!("{}: {e}", path.as_ref().display())))?;
        Self::read_pgm(std::io::BufReader::new(f))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path.as_ref())
            .map_err(|e| Error::Image(format!("{}: {e}", path.as_ref().display())))?;
        self.write_pgm(std::io::BufWriter::new(f))
    }
}

/// Synthetic low-contrast test scene: smooth shading, a few flat shapes
/// with soft edges and fine texture, all inside gray levels 48..=208.
pub fn fixture_image(size: usize) -> GrayImage {
    let s = size as f64;
    GrayImage::from_fn(size, size, |x, y| {
        let (u, v) = (x as f64 / s, y as f64 / s);
        let mut g = 0.5 + 0.12 * (6.0 * u).sin() * (4.0 * v).cos() + 0.08 * (u - v);
        let disk = ((u - 0.32).powi(2) + (v - 0.35).powi(2)).sqrt();
        g += 0.12 / (1.0 + ((disk - 0.16) * 60.0).exp());
        if (0.55..0.85).contains(&u) && (0.55..0.8).contains(&v) {
            g -= 0.13;
        }
        let ring = ((u - 0.7).powi(2) + (v - 0.25).powi(2)).sqrt();
        if (0.08..0.12).contains(&ring) {
            g += 0.1;
        }
        g += 0.025 * ((x * 7 + y * 3) % 11) as f64 / 10.0 - 0.0125;
        g = 0.5 + 1.4 * (g - 0.5);
        let lo = 48.0 / 255.0;
        let hi = 208.0 / 255.0;
        (g.clamp(lo, hi) * 255.0).round() as u8
    })
    .expect("positive size")
}
