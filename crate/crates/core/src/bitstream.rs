//! Stochastic numbers as bitstreams.
//!
//! A [`Bitstream`] encodes a value in `[0, 1]` as the fraction of ones. This
//! module covers generation (independent or with a requested correlation),
//! correlation measurement and transient bit-flip injection.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{check_correlation, check_probability, Error, Result};
use crate::input_vector::correlated_pair;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bitstream {
    bits: Vec<bool>,
}

impl Bitstream {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidArgument("bitstream must not be empty".into()));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            bits: vec![false; n.max(1)],
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            bits: vec![true; n.max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Encoded value: fraction of ones.
    pub fn value(&self) -> f64 {
        self.count_ones() as f64 / self.len() as f64
    }

    pub fn not(&self) -> Bitstream {
        Bitstream {
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn and(&self, other: &Bitstream) -> Result<Bitstream> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Bitstream) -> Result<Bitstream> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn xor(&self, other: &Bitstream) -> Result<Bitstream> {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn zip_with(&self, other: &Bitstream, f: impl Fn(bool, bool) -> bool) -> Result<Bitstream> {
        ensure_same_length(self, other)?;
        Ok(Bitstream {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

pub(crate) fn ensure_same_length(a: &Bitstream, b: &Bitstream) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

impl fmt::Display for Bitstream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstream({self})")
    }
}

/// Parses ASCII `0`/`1`; whitespace and `_` separators are ignored.
impl FromStr for Bitstream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "invalid bit character `{other}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Bitstream::from_bits(bits)
    }
}

/// Joint overlap counts of two equal-length streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverlapCounts {
    pub n11: usize,
    pub n10: usize,
    pub n01: usize,
    pub n00: usize,
}

impl OverlapCounts {
    pub fn of(x: &Bitstream, y: &Bitstream) -> Result<Self> {
        ensure_same_length(x, y)?;
        let mut c = OverlapCounts::default();
        for (&a, &b) in x.bits.iter().zip(&y.bits) {
            match (a, b) {
                (true, true) => c.n11 += 1,
                (true, false) => c.n10 += 1,
                (false, true) => c.n01 += 1,
                (false, false) => c.n00 += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    /// Correlation from overlap counts, in integer arithmetic up to the
    /// final division.
    pub fn scc(&self) -> Result<f64> {
        let n = self.total() as i128;
        let (n11, n10, n01, n00) = (
            self.n11 as i128,
            self.n10 as i128,
            self.n01 as i128,
            self.n00 as i128,
        );
        let ones_x = n11 + n10;
        let ones_y = n11 + n01;
        if ones_x == 0 || ones_y == 0 || ones_x == n || ones_y == n {
            return Err(Error::IndeterminateCorrelation);
        }
        let num = n11 * n00 - n01 * n10;
        let den = if num > 0 {
            n * ones_x.min(ones_y) - ones_x * ones_y
        } else {
            ones_x * ones_y - n * (n11 - n00).max(0)
        };
        Ok(num as f64 / den as f64)
    }
}

/// Correlation of two streams computed from their values and the value of
/// their bitwise AND. Values are taken in units of `1/n²`, so the result is
/// exact up to the final division.
pub fn scc(x: &Bitstream, y: &Bitstream) -> Result<f64> {
    ensure_same_length(x, y)?;
    let n = x.len() as i128;
    let px = x.count_ones() as i128;
    let py = y.count_ones() as i128;
    if px == 0 || px == n || py == 0 || py == n {
        return Err(Error::IndeterminateCorrelation);
    }
    let pxy = x.and(y)?.count_ones() as i128;
    let delta = n * pxy - px * py;
    let den = if delta > 0 {
        n * px.min(py) - px * py
    } else {
        px * py - n * (px + py - n).max(0)
    };
    Ok(delta as f64 / den as f64)
}

/// Same quantity via overlap counts.
pub fn scc_overlap(x: &Bitstream, y: &Bitstream) -> Result<f64> {
    OverlapCounts::of(x, y)?.scc()
}

fn check_length(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "bitstream length must be positive".into(),
        ));
    }
    Ok(())
}

/// Independent Bernoulli(`p`) bits.
pub fn generate<R: Rng + ?Sized>(p: f64, n: usize, rng: &mut R) -> Result<Bitstream> {
    check_probability("p", p)?;
    check_length(n)?;
    Ok(Bitstream {
        bits: (0..n).map(|_| rng.gen::<f64>() < p).collect(),
    })
}

/// Index of the cell of `probs` that `u` in `[0, 1)` falls into.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the cumulative sum
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

/// Two streams whose per-position bit pairs are drawn i.i.d. from the
/// correlated joint distribution for `(p_x, p_y, scc)`.
pub fn generate_pair<R: Rng + ?Sized>(
    p_x: f64,
    p_y: f64,
    scc: f64,
    n: usize,
    rng: &mut R,
) -> Result<(Bitstream, Bitstream)> {
    check_probability("p_x", p_x)?;
    check_probability("p_y", p_y)?;
    check_correlation(scc)?;
    check_length(n)?;
    let joint = correlated_pair(p_x, p_y, scc);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let idx = sample_index(&joint, rng.gen::<f64>());
        x.push(idx & 2 != 0);
        y.push(idx & 1 != 0);
    }
    Ok((Bitstream { bits: x }, Bitstream { bits: y }))
}

/// Flips every bit independently with probability `p_e`.
pub fn inject_bitflips<R: Rng + ?Sized>(x: &Bitstream, p_e: f64, rng: &mut R) -> Result<Bitstream> {
    if !(0.0..0.5).contains(&p_e) {
        return Err(Error::InvalidArgument(format!(
            "error rate {p_e} outside [0, 0.5)"
        )));
    }
    if p_e == 0.0 {
        return Ok(x.clone());
    }
    Ok(Bitstream {
        bits: x
            .bits
            .iter()
            .map(|&b| b ^ (rng.gen::<f64>() < p_e))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bs(s: &str) -> Bitstream {
        s.parse().unwrap()
    }

    #[test]
    fn worked_correlation_pairs() {
        let x = bs("1100 1111 0100");
        let y = bs("0100 1111 0100");
        assert_eq!(scc(&x, &y).unwrap(), 1.0);
        assert_eq!(scc_overlap(&x, &y).unwrap(), 1.0);
        let x = bs("1011 0001 0101");
        let y = bs("1111 1100 0101");
        assert_eq!(scc_overlap(&x, &y).unwrap(), 0.5);
        assert!((scc(&x, &y).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn self_and_complement() {
        let x = bs("0110100111");
        assert_eq!(scc(&x, &x).unwrap(), 1.0);
        assert_eq!(scc(&x, &x.not()).unwrap(), -1.0);
    }

    #[test]
    fn boundary_values_are_indeterminate() {
        let z = Bitstream::zeros(8);
        let o = Bitstream::ones(8);
        assert_eq!(scc(&z, &o), Err(Error::IndeterminateCorrelation));
        assert_eq!(
            scc_overlap(&bs("01010101"), &o),
            Err(Error::IndeterminateCorrelation)
        );
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            scc(&bs("01"), &bs("011")),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(bs("01").and(&bs("0")).is_err());
    }

    #[test]
    fn parse_and_display() {
        let x = bs("10_01 1");
        assert_eq!(x.to_string(), "10011");
        assert!("012".parse::<Bitstream>().is_err());
        assert!("".parse::<Bitstream>().is_err());
    }

    #[test]
    fn degenerate_generation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(generate(0.0, 8, &mut rng).unwrap().to_string(), "00000000");
        assert_eq!(generate(1.0, 8, &mut rng).unwrap().to_string(), "11111111");
        assert!(generate(1.5, 8, &mut rng).is_err());
        assert!(generate(0.5, 0, &mut rng).is_err());
    }

    #[test]
    fn generation_is_seeded() {
        let a = generate(0.4, 256, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate(0.4, 256, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extreme_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, y) = generate_pair(0.5, 0.5, 1.0, 512, &mut rng).unwrap();
        assert_eq!(x, y);
        let (x, y) = generate_pair(0.5, 0.5, -1.0, 512, &mut rng).unwrap();
        assert_eq!(x, y.not());
        assert!(generate_pair(0.5, 0.5, 1.1, 8, &mut rng).is_err());
    }

    #[test]
    fn bitflip_argument_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = bs("0110");
        assert_eq!(inject_bitflips(&x, 0.0, &mut rng).unwrap(), x);
        assert!(inject_bitflips(&x, 0.5, &mut rng).is_err());
    }

    #[test]
    fn sample_index_covers_cells() {
        let p = [0.25, 0.0, 0.5, 0.25];
        assert_eq!(sample_index(&p, 0.0), 0);
        assert_eq!(sample_index(&p, 0.3), 2);
        assert_eq!(sample_index(&p, 0.9), 3);
        assert_eq!(sample_index(&p, 0.999_999_999_999), 3);
    }
}
