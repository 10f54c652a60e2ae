//! Single-gate ReCo: choose the correlation injected at the inputs of a
//! faulty two-input gate so that its output matches the fault-free target.
//!
//! The faulty output at injected correlation `s` is
//! `p_e + (1 - 2 p_e) F(s)` with `F` the piecewise-linear correlation
//! function of the gate, so the error is a piecewise quadratic in `s`.

use serde::{Deserialize, Serialize};

use crate::error::{check_correlation, check_error_rate, Error, Result};
use crate::ptm::GateKind;

pub const DEFAULT_DELTA: f64 = 1e-4;
pub const DEFAULT_STEP: f64 = 0.001;

/// Closed form is replaced by the sweep when it loses by more than this.
const FALLBACK_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReCoProblem {
    pub gate: GateKind,
    pub p_x: f64,
    pub p_y: f64,
    pub p_e: f64,
    pub scc0: f64,
    pub delta: f64,
}

impl ReCoProblem {
    pub fn new(gate: GateKind, p_x: f64, p_y: f64, p_e: f64, scc0: f64) -> Result<Self> {
        if !GateKind::TWO_INPUT.contains(&gate) {
            return Err(Error::InvalidArgument(format!(
                "{gate} is not a two-input gate"
            )));
        }
        for (name, p) in [("p_x", p_x), ("p_y", p_y)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {p} must lie in (0, 1)"
                )));
            }
        }
        check_error_rate(p_e)?;
        check_correlation(scc0)?;
        Ok(Self {
            gate,
            p_x,
            p_y,
            p_e,
            scc0,
            delta: DEFAULT_DELTA,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "delta = {delta} must be positive"
            )));
        }
        self.delta = delta;
        Ok(self)
    }

    /// Negative initial correlations are outside the analysed regimes.
    pub fn out_of_regime(&self) -> bool {
        self.scc0 < 0.0
    }

    pub fn target(&self) -> f64 {
        target_function(self.gate, self.p_x, self.p_y, self.scc0)
    }

    pub fn modified_output(&self, scc_i: f64) -> f64 {
        let f = self
            .gate
            .correlation_functions(self.p_x, self.p_y)
            .at(scc_i);
        self.p_e + (1.0 - 2.0 * self.p_e) * f
    }

    pub fn mse(&self, scc_i: f64) -> f64 {
        let d = self.modified_output(scc_i) - self.target();
        d * d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    ClosedForm,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReCoSolution {
    pub scc_i: f64,
    pub mse: f64,
    pub source: Source,
    pub clamped: bool,
    pub out_of_regime: bool,
}

/// Fault-free output of `gate` when its inputs carry correlation `scc0`.
pub fn target_function(gate: GateKind, p_x: f64, p_y: f64, scc0: f64) -> f64 {
    gate.correlation_functions(p_x, p_y).at(scc0)
}

/// Faulty output at injected correlation `scc_i`.
pub fn modified_output(problem: &ReCoProblem, scc_i: f64) -> f64 {
    problem.modified_output(scc_i)
}

pub fn mse(problem: &ReCoProblem, scc_i: f64) -> f64 {
    problem.mse(scc_i)
}

/// Printed closed-form optimum for the regimes `scc0 ∈ {0, 0.5, 1}`,
/// before clamping. `None` for other initial correlations.
pub fn closed_form(problem: &ReCoProblem) -> Option<f64> {
    let pe = problem.p_e;
    let (px, py) = ordered(problem.p_x, problem.p_y);
    let xy = px * py;
    let low = px + py <= 1.0;
    let regime = regime_of(problem.scc0)?;
    let v = match (problem.gate, regime, low) {
        (GateKind::And, Regime::Zero, true) => -(pe - 2.0 * pe * xy) / (xy * (1.0 - 2.0 * pe)),
        (GateKind::And, Regime::Zero, false) => {
            (pe - px - py + xy - 2.0 * pe * xy + 1.0) / ((2.0 * pe - 1.0) * (px - 1.0) * (py - 1.0))
        }
        (GateKind::Xor, Regime::Zero, true) => {
            (pe - 2.0 * pe * (px + py) + 4.0 * pe * xy) / (2.0 * xy - 4.0 * pe * xy)
        }
        (GateKind::Xor, Regime::Zero, false) => {
            (pe - 2.0 * pe * px - 2.0 * pe * py + 4.0 * pe * xy)
                / (4.0 * pe + 2.0 * (px + py) * (1.0 - 2.0 * pe)
                    - 2.0 * xy * (1.0 + 2.0 * pe)
                    - 2.0)
        }
        (GateKind::Or, Regime::Zero, true) => {
            (pe - 2.0 * pe * (px + py) + 2.0 * pe * xy) / (xy - 2.0 * pe * xy)
        }
        (GateKind::Or, Regime::Zero, false) => {
            (2.0 * pe * (py - px) - pe + xy * (1.0 - 2.0 * pe)) / (xy * (1.0 - 2.0 * pe))
        }
        (GateKind::And, Regime::One, true) => {
            (px - pe - xy * (1.0 - 2.0 * pe)) / (px * (2.0 * pe - 1.0) * (py - 1.0))
        }
        (GateKind::And, Regime::One, false) => {
            (px - pe + 2.0 * pe * px + xy) / (px - 2.0 * pe * px - xy + 2.0 * pe * xy)
        }
        (GateKind::And, Regime::Half, true) => {
            (0.5 * px * (1.0 - py) + 2.0 * pe * xy - pe)
                / (0.5 * px * (1.0 - py) * (1.0 - 3.0 * pe))
        }
        (GateKind::And, Regime::Half, false) => {
            (2.0 * pe * px - px - 2.0 * pe + xy + 2.0 * pe * xy)
                / (2.0 * px - 4.0 * pe * px - 2.0 * xy + 4.0 * pe * xy)
        }
        (GateKind::Xor, Regime::One, true) => {
            (pe * (1.0 - 2.0 * px) * (1.0 - 2.0 * py) + 2.0 * px * (1.0 - py))
                / (2.0 * px * (2.0 * pe - 1.0) * (py - 1.0))
        }
        (GateKind::Xor, Regime::One, false) => {
            (pe - 2.0 * px + 2.0 * pe * px - 2.0 * pe * py + 2.0 * xy)
                / (2.0 * px - 4.0 * pe * px - 2.0 * xy + 4.0 * pe * xy)
        }
        (GateKind::Xor, Regime::Half, true) => {
            (2.0 * pe * (1.0 - 2.0 * py) * (1.0 - 2.0 * px) + 2.0 * px * (1.0 - py))
                / (px * (5.0 * pe - 3.0) * (py - 1.0))
        }
        (GateKind::Xor, Regime::Half, false) => {
            (pe - px - 2.0 * pe * py + xy + 2.0 * pe * xy)
                / (2.0 * px - 4.0 * pe * px - 2.0 * xy + 4.0 * pe * xy)
        }
        (GateKind::Or, Regime::One, true) => {
            (pe + px - 2.0 * pe * px - 2.0 * pe * py - xy + 2.0 * pe * xy)
                / (px * (2.0 * pe - 1.0) * (py - 1.0))
        }
        (GateKind::Or, Regime::One, false) => {
            (pe - px - 2.0 * pe * py + xy) / (px - 2.0 * pe * px - xy + 2.0 * pe * xy)
        }
        (GateKind::Or, Regime::Half, true) => {
            (2.0 * pe + px - 4.0 * pe * px - 4.0 * pe * py - xy + 4.0 * pe * xy)
                / (2.0 * px - 3.0 * pe * px - 2.0 * xy + 3.0 * pe * xy)
        }
        (GateKind::Or, Regime::Half, false) => {
            (2.0 * pe - px - 2.0 * pe * px - 4.0 * pe * py + xy + 2.0 * pe * xy)
                / (2.0 * px - 4.0 * pe * px - 2.0 * xy + 4.0 * pe * xy)
        }
        _ => return None,
    };
    Some(v)
}

/// General-`scc0` forms printed for XOR and OR. Advisory only: they are
/// never used by [`scc_star`].
pub fn general_closed_form(problem: &ReCoProblem) -> Option<f64> {
    let pe = problem.p_e;
    let s = problem.scc0;
    let (px, py) = ordered(problem.p_x, problem.p_y);
    match problem.gate {
        GateKind::Xor => Some(
            (pe * (1.0 - 2.0 * px) * (1.0 - 2.0 * py) + 2.0 * s * px * (1.0 - py))
                / (-px * (py - 1.0) * (s - pe - 3.0 * s * pe + 1.0)),
        ),
        GateKind::Or => Some(
            (pe + s * px * (1.0 - py) - 2.0 * pe * (px + py) + 2.0 * pe * px * py)
                / (px * (1.0 - py) * (1.0 - pe) - s * pe * px * (1.0 - py)),
        ),
        _ => None,
    }
}

/// Optimal injected correlation: the closed form where one exists, checked
/// against the grid minimum and replaced by the sweep when it loses.
pub fn scc_star(problem: &ReCoProblem) -> ReCoSolution {
    let out_of_regime = problem.out_of_regime();
    if problem.p_e == 0.0 {
        return ReCoSolution {
            scc_i: problem.scc0,
            mse: problem.mse(problem.scc0),
            source: Source::ClosedForm,
            clamped: false,
            out_of_regime,
        };
    }
    let swept = sweep(problem);
    let grid_min = grid_argmin(problem, DEFAULT_STEP).1;
    let Some(raw) = closed_form(problem).filter(|v| v.is_finite()) else {
        return swept;
    };
    let scc_i = raw.clamp(-1.0, 1.0);
    let err = problem.mse(scc_i);
    if err > grid_min + FALLBACK_MARGIN {
        return swept;
    }
    ReCoSolution {
        scc_i,
        mse: err,
        source: Source::ClosedForm,
        clamped: scc_i != raw,
        out_of_regime,
    }
}

/// Grid search over `[-1, 1]` at the default resolution.
pub fn sweep(problem: &ReCoProblem) -> ReCoSolution {
    sweep_with_step(problem, DEFAULT_STEP)
}

/// Scans upward from -1. At the first point with `mse <= delta` the scan
/// keeps stepping while the error still decreases and returns the bottom of
/// that basin; if no point qualifies the grid argmin is returned.
pub fn sweep_with_step(problem: &ReCoProblem, step: f64) -> ReCoSolution {
    let n = grid_len(step);
    let (k, mse, _) = first_basin(n, problem.delta, |k| problem.mse(grid_point(k, n)));
    ReCoSolution {
        scc_i: grid_point(k, n),
        mse,
        source: Source::Sweep,
        clamped: false,
        out_of_regime: problem.out_of_regime(),
    }
}

/// Scan policy shared by every sweep: the bottom of the first basin that
/// dips to `delta`, else the lowest-index minimum. Returns the index, its
/// error and the number of evaluations spent.
pub(crate) fn first_basin(n: usize, delta: f64, f: impl Fn(usize) -> f64) -> (usize, f64, usize) {
    let mut evals = 0;
    let mut eval = |k: usize| {
        evals += 1;
        f(k)
    };
    let mut best = (0, f64::INFINITY);
    for k in 0..n {
        let e = eval(k);
        if e <= delta {
            let (mut at, mut cur) = (k, e);
            while at + 1 < n {
                let next = eval(at + 1);
                if next >= cur {
                    break;
                }
                at += 1;
                cur = next;
            }
            return (at, cur, evals);
        }
        if e < best.1 {
            best = (k, e);
        }
    }
    (best.0, best.1, evals)
}

/// `(scc_i, mse)` at every grid point, for plotting.
pub fn sweep_trace(problem: &ReCoProblem, step: f64) -> Vec<(f64, f64)> {
    let n = grid_len(step);
    (0..n)
        .map(|k| {
            let s = grid_point(k, n);
            (s, problem.mse(s))
        })
        .collect()
}

/// Lowest-index grid minimiser.
pub fn grid_argmin(problem: &ReCoProblem, step: f64) -> (f64, f64) {
    let n = grid_len(step);
    let s = grid_point(grid_argmin_index(problem, n), n);
    (s, problem.mse(s))
}

fn grid_argmin_index(problem: &ReCoProblem, n: usize) -> usize {
    let mut best = (0, f64::INFINITY);
    for k in 0..n {
        let e = problem.mse(grid_point(k, n));
        if e < best.1 {
            best = (k, e);
        }
    }
    best.0
}

/// Number of points of the grid `-1, -1 + step, ..., 1`.
pub(crate) fn grid_len(step: f64) -> usize {
    assert!(step > 0.0 && step <= 1.0, "grid step {step} outside (0, 1]");
    (2.0 / step).round() as usize + 1
}

pub(crate) fn grid_point(k: usize, n: usize) -> f64 {
    -1.0 + 2.0 * k as f64 / (n - 1) as f64
}

#[derive(Clone, Copy)]
enum Regime {
    Zero,
    Half,
    One,
}

fn regime_of(scc0: f64) -> Option<Regime> {
    match scc0 {
        0.0 => Some(Regime::Zero),
        0.5 => Some(Regime::Half),
        1.0 => Some(Regime::One),
        _ => None,
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
