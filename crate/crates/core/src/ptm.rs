//! Probabilistic transfer matrices.
//!
//! A [`Ptm`] of a block with `k` inputs and `l` outputs is a `2^k x 2^l`
//! row-stochastic matrix whose entry `(i, j)` is the probability of output
//! combination `j` given input combination `i`. Blocks in series compose by
//! matrix product, blocks side by side by Kronecker product.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_error_rate, Error, Result};
use crate::input_vector::{negative_pair, positive_pair, uncorrelated_pair, InputVector};

const ROW_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
    Xor,
    Not,
    Mux2,
}

impl GateKind {
    pub const TWO_INPUT: [GateKind; 3] = [GateKind::And, GateKind::Or, GateKind::Xor];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            GateKind::And | GateKind::Or | GateKind::Xor => 2,
            GateKind::Mux2 => 3,
        }
    }

    /// Boolean function. Inputs are in netlist order; for `Mux2` that is
    /// `(a, b, sel)` with output `b` when `sel` is set.
    pub fn apply(self, inputs: &[bool]) -> bool {
        match self {
            GateKind::And => inputs[0] & inputs[1],
            GateKind::Or => inputs[0] | inputs[1],
            GateKind::Xor => inputs[0] ^ inputs[1],
            GateKind::Not => !inputs[0],
            GateKind::Mux2 => {
                if inputs[2] {
                    inputs[1]
                } else {
                    inputs[0]
                }
            }
        }
    }

    /// Functions realised at correlation 0, +1 and -1 for a two-input gate.
    pub fn correlation_functions(self, p_x: f64, p_y: f64) -> CorrelationFunctions {
        let out = |v: [f64; 4]| -> f64 {
            (0..4)
                .filter(|&i| self.apply(&[i & 2 != 0, i & 1 != 0]))
                .map(|i| v[i])
                .sum()
        };
        CorrelationFunctions {
            f0: out(uncorrelated_pair(p_x, p_y)),
            f_pos: out(positive_pair(p_x, p_y)),
            f_neg: out(negative_pair(p_x, p_y)),
        }
    }
}

/// `F_0`, `F_{+1}`, `F_{-1}` of a two-input gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationFunctions {
    pub f0: f64,
    pub f_pos: f64,
    pub f_neg: f64,
}

impl CorrelationFunctions {
    /// Output at an arbitrary correlation by linear interpolation.
    pub fn at(&self, scc: f64) -> f64 {
        if scc >= 0.0 {
            (1.0 - scc) * self.f0 + scc * self.f_pos
        } else {
            (1.0 + scc) * self.f0 - scc * self.f_neg
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
            GateKind::Not => "NOT",
            GateKind::Mux2 => "MUX2",
        };
        f.write_str(s)
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Ok(GateKind::And),
            "OR" => Ok(GateKind::Or),
            "XOR" => Ok(GateKind::Xor),
            "NOT" => Ok(GateKind::Not),
            "MUX2" | "MUX" => Ok(GateKind::Mux2),
            other => Err(Error::InvalidArgument(format!(
                "unknown gate kind `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ptm {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Ptm {
    /// Builds a matrix from row-major entries, checking that every row is a
    /// distribution.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        for r in 0..rows {
            let row = m.row(r);
            if row.iter().any(|&v| v < -ROW_TOLERANCE) {
                return Err(Error::InvalidArgument(format!("negative entry in row {r}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("row {r} sums to {s}")));
            }
        }
        Ok(m)
    }

    /// Identity on `bits` wires.
    pub fn identity(bits: usize) -> Self {
        let n = 1 << bits;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    /// Transfer matrix of a single gate whose output flips with probability
    /// `p_e`. At `p_e = 0` this is the ideal matrix.
    pub fn gate(kind: GateKind, p_e: f64) -> Result<Self> {
        check_error_rate(p_e)?;
        let k = kind.arity();
        let rows = 1 << k;
        let mut data = Vec::with_capacity(rows * 2);
        for i in 0..rows {
            let bits: Vec<bool> = (0..k).map(|b| i >> (k - 1 - b) & 1 == 1).collect();
            let ideal = kind.apply(&netlist_order(kind, &bits));
            if ideal {
                data.extend([p_e, 1.0 - p_e]);
            } else {
                data.extend([1.0 - p_e, p_e]);
            }
        }
        Ok(Self {
            rows,
            cols: 2,
            data,
        })
    }

    /// Wire fanout: one input copied onto `copies` outputs.
    pub fn fanout(copies: usize) -> Result<Self> {
        if copies < 2 {
            return Err(Error::InvalidArgument(
                "fanout needs at least two copies".into(),
            ));
        }
        let cols = 1 << copies;
        let mut data = vec![0.0; 2 * cols];
        data[0] = 1.0;
        data[2 * cols - 1] = 1.0;
        Ok(Self {
            rows: 2,
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_ideal(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn is_row_stochastic(&self, tol: f64) -> bool {
        (0..self.rows).all(|r| (self.row(r).iter().sum::<f64>() - 1.0).abs() <= tol)
    }

    /// Blocks in series: `self` feeds `next`.
    pub fn series(&self, next: &Ptm) -> Result<Ptm> {
        if self.cols != next.rows {
            return Err(Error::DimensionMismatch(format!(
                "series of {}x{} and {}x{}",
                self.rows, self.cols, next.rows, next.cols
            )));
        }
        let mut data = vec![0.0; self.rows * next.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..next.cols {
                    data[i * next.cols + j] += a * next.get(k, j);
                }
            }
        }
        Ok(Ptm {
            rows: self.rows,
            cols: next.cols,
            data,
        })
    }

    /// Blocks side by side (Kronecker product); `self` holds the more
    /// significant wires.
    pub fn parallel(&self, other: &Ptm) -> Ptm {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = vec![0.0; rows * cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        data[(i * other.rows + k) * cols + j * other.cols + l] =
                            a * other.get(k, l);
                    }
                }
            }
        }
        Ptm { rows, cols, data }
    }

    /// Output distribution `iv * self`.
    pub fn evaluate(&self, iv: &InputVector) -> Result<Vec<f64>> {
        if iv.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "input vector of length {} against {} rows",
                iv.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &p) in iv.probs().iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += p * self.get(i, j);
            }
        }
        Ok(out)
    }

    /// Probability mass the faulty matrix places on the ideal outputs,
    /// weighted by the input distribution.
    pub fn reliability(&self, ideal: &Ptm, iv: &InputVector) -> Result<f64> {
        if self.rows != ideal.rows || self.cols != ideal.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} against ideal {}x{}",
                self.rows, self.cols, ideal.rows, ideal.cols
            )));
        }
        if iv.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "input vector of length {} against {} rows",
                iv.len(),
                self.rows
            )));
        }
        let mut r = 0.0;
        for (i, &p) in iv.probs().iter().enumerate() {
            for j in 0..self.cols {
                if ideal.get(i, j) == 1.0 {
                    r += self.get(i, j) * p;
                }
            }
        }
        Ok(r)
    }
}

/// Kronecker product of several blocks, first block most significant.
pub fn parallel_all(blocks: &[Ptm]) -> Option<Ptm> {
    let mut it = blocks.iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, b| acc.parallel(b)))
}

/// Product of several blocks in series order.
pub fn series_all(blocks: &[Ptm]) -> Result<Ptm> {
    let mut it = blocks.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty series".into()))?
        .clone();
    it.try_fold(first, |acc, b| acc.series(b))
}

// MUX matrix rows are indexed (s, a, b) with the select line most
// significant; netlist order is (a, b, s).
fn netlist_order(kind: GateKind, row_bits: &[bool]) -> Vec<bool> {
    match kind {
        GateKind::Mux2 => vec![row_bits[1], row_bits[2], row_bits[0]],
        _ => row_bits.to_vec(),
    }
}
