//! Joint input distributions, including the correlated two-input family.

use crate::error::{check_correlation, check_probability, Error, Result};

/// Joint probability distribution over the `2^k` bit combinations of `k`
/// inputs. Index bit `k-1` is the first input (MSB).
#[derive(Debug, Clone, PartialEq)]
pub struct InputVector {
    probs: Vec<f64>,
}

const SUM_TOLERANCE: f64 = 1e-12;

impl InputVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || !probs.len().is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "input vector length {} is not a power of two",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| p < -SUM_TOLERANCE || p.is_nan()) {
            return Err(Error::InvalidArgument(
                "negative entry in input vector".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "input vector sums to {sum}"
            )));
        }
        Ok(Self { probs })
    }

    /// Independent inputs: the Kronecker product of `[1-p, p]` rows.
    pub fn independent(marginals: &[f64]) -> Result<Self> {
        let mut probs = vec![1.0];
        for (i, &p) in marginals.iter().enumerate() {
            check_probability(&format!("marginal {i}"), p)?;
            probs = probs.iter().flat_map(|&q| [q * (1.0 - p), q * p]).collect();
        }
        Ok(Self { probs })
    }

    /// Two-input vector `[i00, i01, i10, i11]` for marginals `p_x`, `p_y`
    /// at correlation `scc`: the product form at 0, the maximal or minimal
    /// overlap forms at +1 / -1, and the linear mixture in between.
    pub fn correlated(p_x: f64, p_y: f64, scc: f64) -> Result<Self> {
        check_probability("p_x", p_x)?;
        check_probability("p_y", p_y)?;
        check_correlation(scc)?;
        Ok(Self {
            probs: correlated_pair(p_x, p_y, scc).to_vec(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Number of inputs `k`.
    pub fn inputs(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    /// Probability that input `i` (0 = MSB) is one.
    pub fn marginal(&self, i: usize) -> f64 {
        let k = self.inputs();
        let bit = k - 1 - i;
        self.probs
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx >> bit & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Product-form vector at zero correlation.
pub fn uncorrelated_pair(p_x: f64, p_y: f64) -> [f64; 4] {
    [
        (1.0 - p_x) * (1.0 - p_y),
        (1.0 - p_x) * p_y,
        p_x * (1.0 - p_y),
        p_x * p_y,
    ]
}

/// Maximal-overlap vector at correlation +1.
pub fn positive_pair(p_x: f64, p_y: f64) -> [f64; 4] {
    if p_x > p_y {
        [1.0 - p_x, 0.0, p_x - p_y, p_y]
    } else {
        [1.0 - p_y, p_y - p_x, 0.0, p_x]
    }
}

/// Minimal-overlap vector at correlation -1.
pub fn negative_pair(p_x: f64, p_y: f64) -> [f64; 4] {
    if p_x + p_y <= 1.0 {
        [1.0 - (p_x + p_y), p_y, p_x, 0.0]
    } else {
        [0.0, 1.0 - p_x, 1.0 - p_y, (p_x + p_y) - 1.0]
    }
}

/// Unchecked version of [`InputVector::correlated`].
pub fn correlated_pair(p_x: f64, p_y: f64, scc: f64) -> [f64; 4] {
    let base = uncorrelated_pair(p_x, p_y);
    let (extreme, w) = if scc >= 0.0 {
        (positive_pair(p_x, p_y), scc)
    } else {
        (negative_pair(p_x, p_y), -scc)
    };
    let mut out = [0.0; 4];
    for i in 0..4 {
        // clip rounding residue so entries stay non-negative
        out[i] = ((1.0 - w) * base[i] + w * extreme[i]).max(0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn product_form_at_zero() {
        let v = InputVector::correlated(0.3, 0.6, 0.0).unwrap();
        close(v.probs(), &[0.28, 0.42, 0.12, 0.18]);
    }

    #[test]
    fn maximal_overlap_at_plus_one() {
        let v = InputVector::correlated(0.3, 0.6, 1.0).unwrap();
        close(v.probs(), &[0.4, 0.3, 0.0, 0.3]);
        let v = InputVector::correlated(0.6, 0.3, 1.0).unwrap();
        close(v.probs(), &[0.4, 0.0, 0.3, 0.3]);
    }

    #[test]
    fn minimal_overlap_at_minus_one() {
        let v = InputVector::correlated(0.3, 0.6, -1.0).unwrap();
        close(v.probs(), &[0.1, 0.6, 0.3, 0.0]);
        let v = InputVector::correlated(0.7, 0.6, -1.0).unwrap();
        close(v.probs(), &[0.0, 0.3, 0.4, 0.3]);
    }

    #[test]
    fn marginals_survive_mixing() {
        for &scc in &[-1.0, -0.4, 0.0, 0.25, 1.0] {
            let v = InputVector::correlated(0.3, 0.6, scc).unwrap();
            assert!((v.marginal(0) - 0.3).abs() < 1e-12);
            assert!((v.marginal(1) - 0.6).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(InputVector::correlated(1.2, 0.5, 0.0).is_err());
        assert!(InputVector::correlated(0.2, 0.5, 1.5).is_err());
        assert!(InputVector::new(vec![0.5, 0.25, 0.25]).is_err());
        assert!(InputVector::new(vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn independent_matches_pair_form() {
        let v = InputVector::independent(&[0.3, 0.6]).unwrap();
        close(v.probs(), &uncorrelated_pair(0.3, 0.6));
        assert_eq!(
            InputVector::independent(&[0.1, 0.2, 0.3]).unwrap().inputs(),
            3
        );
    }
}
