//! Linear contrast stretch on stochastic streams.
//!
//! For a pixel of normalised level `x` and input floor `lo` the circuit
//!
//! ```text
//! A1 = AND(sb, x)      sb = NOT s, s of value 1/2
//! A2 = AND(s, nlo)     nlo of value 1 - lo
//! Z  = OR(A1, A2)
//! ```
//!
//! is a multiplexer computing the scaled difference `w = (x - lo)/2 + 1/2`,
//! since `A1` and `A2` are never high together. The stretched level is
//! decoded as `(2w - 1) / (hi - lo)`. Transient faults on `A1`/`A2` break
//! the exclusivity and bias `w`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::GrayImage;
use crate::circuit::{reco_miso, Circuit, CircuitBuilder, FaultMap, ReCoConfig};
use crate::error::{Error, Result};
use crate::input_vector::correlated_pair;
use crate::ptm::GateKind;

pub const DEFAULT_LENGTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StretchParams {
    pub in_lo: u8,
    pub in_hi: u8,
    pub out_lo: u8,
    pub out_hi: u8,
    /// Bitstream length per pixel.
    pub length: usize,
}

impl StretchParams {
    pub fn new(in_lo: u8, in_hi: u8, out_lo: u8, out_hi: u8, length: usize) -> Result<Self> {
        if in_lo >= in_hi || out_lo >= out_hi {
            return Err(Error::InvalidArgument(
                "stretch bounds need low < high".into(),
            ));
        }
        if length == 0 {
            return Err(Error::InvalidArgument(
                "bitstream length must be positive".into(),
            ));
        }
        Ok(Self {
            in_lo,
            in_hi,
            out_lo,
            out_hi,
            length,
        })
    }

    /// Min-max stretch of `img` to the full 8-bit range.
    pub fn for_image(img: &GrayImage) -> Result<Self> {
        let (lo, hi) = img.range();
        Self::new(lo, hi, 0, 255, DEFAULT_LENGTH)
    }

    pub fn with_length(mut self, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument(
                "bitstream length must be positive".into(),
            ));
        }
        self.length = length;
        Ok(self)
    }

    fn encode(&self, v: u8) -> (f64, f64) {
        (v as f64 / 255.0, self.in_lo as f64 / 255.0)
    }

    /// Output level from the normalised stretched value.
    fn decode(&self, t: f64) -> u8 {
        let span = (self.out_hi - self.out_lo) as f64;
        (self.out_lo as f64 + span * t.clamp(0.0, 1.0)).round() as u8
    }

    fn gain(&self) -> f64 {
        255.0 / (self.in_hi - self.in_lo) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Clean,
    Faulty,
    Reco,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clean" => Ok(Mode::Clean),
            "faulty" => Ok(Mode::Faulty),
            "reco" => Ok(Mode::Reco),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

/// Correlations injected at `A1` and `A2` for one gray level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelCorrection {
    pub scc_a1: f64,
    pub scc_a2: f64,
    pub mse: f64,
    pub l: usize,
}

#[derive(Debug, Clone)]
pub struct StretchOutput {
    pub image: GrayImage,
    /// Per input gray level, in reco mode only.
    pub corrections: BTreeMap<u8, LevelCorrection>,
}

/// Both AND gates of the multiplier stage at rate `p_e`.
pub fn default_faults(p_e: f64) -> Result<FaultMap> {
    FaultMap::new().with("A1", p_e)?.with("A2", p_e)
}

/// Exact stretch, the ground truth.
pub fn stretch_reference(img: &GrayImage, params: &StretchParams) -> GrayImage {
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| {
            let (x, lo) = params.encode(v);
            params.decode((x - lo) * params.gain())
        })
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("same shape")
}

/// The stretch circuit for one pixel level. Gate ids are `A1`, `A2`, `Z`.
pub fn stretch_circuit(x: f64, lo: f64) -> Result<Circuit> {
    CircuitBuilder::new()
        .input("s", 0.5)
        .input("sb", 0.5)
        .input("x", x)
        .input("nlo", 1.0 - lo)
        .correlate("s", "sb", -1.0)
        .gate("A1", GateKind::And, &["sb", "x"])
        .gate("A2", GateKind::And, &["s", "nlo"])
        .gate("Z", GateKind::Or, &["A1", "A2"])
        .output("w", "Z")
        .build()
}

/// Runs the stretch pixel by pixel on `params.length`-bit streams.
///
/// Input streams carry exact rounded counts; bit flips are independent
/// draws. All randomness of
/// pixel `i` comes from stream `i` of a generator seeded with `seed`.
pub fn contrast_stretch(
    img: &GrayImage,
    params: &StretchParams,
    faults: &FaultMap,
    mode: Mode,
    seed: u64,
) -> Result<StretchOutput> {
    let probe = stretch_circuit(0.5, 0.5)?;
    faults.validate(&probe)?;
    let rates = match mode {
        Mode::Clean => [0.0; 3],
        _ => [faults.get("A1"), faults.get("A2"), faults.get("Z")],
    };

    let mut corrections = BTreeMap::new();
    if mode == Mode::Reco {
        let mut levels: Vec<u8> = img.pixels().to_vec();
        levels.sort_unstable();
        levels.dedup();
        let cfg = ReCoConfig {
            delta: 1e-6,
            coarse_step: 0.02,
            ..ReCoConfig::default()
        };
        let found: Vec<Result<(u8, LevelCorrection)>> = levels
            .par_iter()
            .map(|&v| {
                let (x, lo) = params.encode(v);
                let out = reco_miso(&stretch_circuit(x, lo)?, faults, &cfg)?;
                let inj = out.injections();
                Ok((
                    v,
                    LevelCorrection {
                        scc_a1: inj.get("A1").copied().unwrap_or(0.0),
                        scc_a2: inj.get("A2").copied().unwrap_or(0.0),
                        mse: out.mse,
                        l: out.l,
                    },
                ))
            })
            .collect();
        for r in found {
            let (v, c) = r?;
            corrections.insert(v, c);
        }
    }

    let pixels: Vec<u8> = img
        .pixels()
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let (x, lo) = params.encode(v);
            let (c1, c2) = corrections
                .get(&v)
                .map_or((0.0, 0.0), |c| (c.scc_a1, c.scc_a2));
            let w = simulate_pixel(x, 1.0 - lo, c1, c2, rates, params.length, seed, i as u64);
            params.decode((2.0 * w - 1.0) * params.gain())
        })
        .collect();
    Ok(StretchOutput {
        image: GrayImage::new(img.width(), img.height(), pixels)?,
        corrections,
    })
}

/// Fraction of ones at `Z`. `s` is the root and `sb` its complement; `x`
/// follows `sb` and `nlo` follows `s` through their conditional
/// probabilities. Since the gates act bitwise and flips are independent, the
/// order of bits is irrelevant: each conditional block holds an exact
/// rounded count of ones.
#[allow(clippy::too_many_arguments)]
fn simulate_pixel(
    x: f64,
    nlo: f64,
    scc_a1: f64,
    scc_a2: f64,
    rates: [f64; 3],
    n: usize,
    seed: u64,
    stream: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let cond = |p_parent: f64, p_child: f64, scc: f64| {
        let j = correlated_pair(p_parent, p_child, scc);
        let div = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        [div(j[1], j[0] + j[1]), div(j[3], j[2] + j[3])]
    };
    let x_given_sb = cond(0.5, x, scc_a1);
    let nlo_given_s = cond(0.5, nlo, scc_a2);
    let ones_s = n / 2;
    let block = |len: usize, p: f64| ((p * len as f64).round() as usize).min(len);
    // s = 1 half: sb = 0, so x uses its sb = 0 conditional.
    let x_in_s = block(ones_s, x_given_sb[0]);
    let x_in_sb = block(n - ones_s, x_given_sb[1]);
    let nlo_in_s = block(ones_s, nlo_given_s[1]);
    let nlo_in_sb = block(n - ones_s, nlo_given_s[0]);
    let mut ones = 0usize;
    for k in 0..n {
        let s = k < ones_s;
        let (xb, nb) = if s {
            (k < x_in_s, k < nlo_in_s)
        } else {
            (k - ones_s < x_in_sb, k - ones_s < nlo_in_sb)
        };
        let a1 = (!s & xb) ^ (rng.gen::<f64>() < rates[0]);
        let a2 = (s & nb) ^ (rng.gen::<f64>() < rates[1]);
        let z = (a1 | a2) ^ (rng.gen::<f64>() < rates[2]);
        ones += z as usize;
    }
    ones as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::evaluate;
    use crate::imaging::{fixture_image, ssim};

    #[test]
    fn circuit_computes_scaled_difference() {
        for (x, lo) in [(0.3, 0.2), (0.7, 0.28), (0.5, 0.5)] {
            let w = evaluate(&stretch_circuit(x, lo).unwrap(), &FaultMap::new()).unwrap()[0];
            assert!((w - ((x - lo) / 2.0 + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn pixel_simulation_tracks_exact_value() {
        let (x, lo) = (0.6, 0.3);
        let c = stretch_circuit(x, lo).unwrap();
        let f = FaultMap::new()
            .with("A1", 0.2)
            .unwrap()
            .with("A2", 0.2)
            .unwrap();
        let exact = evaluate(&c, &f).unwrap()[0];
        let mean: f64 = (0..200)
            .map(|i| simulate_pixel(x, 1.0 - lo, 0.0, 0.0, [0.2, 0.2, 0.0], 256, 5, i))
            .sum::<f64>()
            / 200.0;
        assert!((mean - exact).abs() < 0.005, "{mean} vs {exact}");
    }

    #[test]
    fn clean_identity_is_within_one_level() {
        let img = GrayImage::from_fn(16, 16, |x, y| (x * 16 + y) as u8).unwrap();
        let p = StretchParams::new(0, 255, 0, 255, DEFAULT_LENGTH).unwrap();
        let out = contrast_stretch(&img, &p, &FaultMap::new(), Mode::Clean, 3).unwrap();
        for (&a, &b) in out.image.pixels().iter().zip(img.pixels()) {
            assert!(a.abs_diff(b) <= 1, "{a} vs {b}");
        }
    }

    #[test]
    fn clean_matches_reference() {
        let img = fixture_image(64);
        let p = StretchParams::for_image(&img).unwrap();
        let out =
            contrast_stretch(&img, &p, &default_faults(0.2).unwrap(), Mode::Clean, 1).unwrap();
        assert!(
            out.image
                .mean_abs_diff(&stretch_reference(&img, &p))
                .unwrap()
                <= 2.0
        );
        assert!(out.corrections.is_empty());
    }

    #[test]
    fn reco_beats_faulty() {
        let img = fixture_image(64);
        let p = StretchParams::for_image(&img).unwrap();
        let truth = stretch_reference(&img, &p);
        let f = default_faults(0.2).unwrap();
        let faulty = contrast_stretch(&img, &p, &f, Mode::Faulty, 9).unwrap();
        let reco = contrast_stretch(&img, &p, &f, Mode::Reco, 9).unwrap();
        assert!(ssim(&reco.image, &truth).unwrap() > ssim(&faulty.image, &truth).unwrap());
        assert!(reco.corrections.values().all(|c| c.mse < 1e-5));
    }

    #[test]
    fn deterministic_per_seed() {
        let img = fixture_image(32);
        let p = StretchParams::for_image(&img).unwrap();
        let f = default_faults(0.2).unwrap();
        let a = contrast_stretch(&img, &p, &f, Mode::Faulty, 4).unwrap();
        let b = contrast_stretch(&img, &p, &f, Mode::Faulty, 4).unwrap();
        assert_eq!(a.image, b.image);
    }

    #[test]
    fn rejects_unknown_fault_gate() {
        let img = fixture_image(8);
        let p = StretchParams::for_image(&img).unwrap();
        let f = FaultMap::new().with("G9", 0.1).unwrap();
        assert!(contrast_stretch(&img, &p, &f, Mode::Faulty, 0).is_err());
        assert!(StretchParams::new(10, 10, 0, 255, 256).is_err());
    }
}
