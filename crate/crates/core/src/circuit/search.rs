//! Placement of ReCo blocks in multi-gate circuits.

use rayon::prelude::*;
use serde::Serialize;

use super::analysis::{is_connected, priority_sort, DEFAULT_PRIORITY};
use super::eval::{evaluate_with, output_mse, InjectionModel, Injections};
use super::{Circuit, FaultMap};
use crate::error::{Error, Result};
use crate::ptm::GateKind;
use crate::reco::{first_basin, grid_len, grid_point, DEFAULT_DELTA, DEFAULT_STEP};

#[derive(Debug, Clone, PartialEq)]
pub struct ReCoConfig {
    pub delta: f64,
    /// Resolution of single-gate sweeps and of the dual refinement.
    pub step: f64,
    /// Resolution of the first dual pass.
    pub coarse_step: f64,
    pub max_blocks: usize,
    pub priority: Vec<GateKind>,
}

impl Default for ReCoConfig {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            step: DEFAULT_STEP,
            coarse_step: 0.01,
            max_blocks: 2,
            priority: DEFAULT_PRIORITY.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correction {
    pub gate: String,
    pub scc_i: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReCoOutcome {
    pub uncorrected_mse: f64,
    pub mse: f64,
    pub corrections: Vec<Correction>,
    pub l: usize,
    /// Circuit evaluations consumed by the search.
    pub iterations: usize,
    /// Candidate gates in the order they were tried.
    pub candidates: Vec<String>,
}

impl ReCoOutcome {
    pub fn injections(&self) -> Injections {
        self.corrections
            .iter()
            .map(|c| (c.gate.clone(), c.scc_i))
            .collect()
    }
}

/// Single-output circuits: correlation is injected at level-1 gates on the
/// error paths, one gate at a time in priority order, then in pairs.
pub fn reco_miso(c: &Circuit, faults: &FaultMap, cfg: &ReCoConfig) -> Result<ReCoOutcome> {
    if c.outputs().len() != 1 {
        return Err(Error::Validation(format!(
            "MISO analysis needs one output, circuit has {}",
            c.outputs().len()
        )));
    }
    let connected = is_connected(c, &faults.faulty(c));
    let gates = connected.iter().filter_map(|id| c.gate(id));
    let order = priority_sort(gates, &cfg.priority)
        .into_iter()
        .map(|g| g.id.clone())
        .collect();
    search(c, faults, cfg, order, InjectionModel::RederiveInputs)
}

/// Multi-output circuits: only the faulty gates themselves receive
/// correlators, so outputs outside their fanout cones are untouched.
pub fn reco_mimo(c: &Circuit, faults: &FaultMap, cfg: &ReCoConfig) -> Result<ReCoOutcome> {
    let faulty = faults.faulty(c);
    let gates = faulty.iter().filter_map(|id| c.gate(id)).filter(|g| {
        g.kind.arity() == 2
            && !c
                .outputs_reached(c.gate_index(&g.id).expect("known gate"))
                .is_empty()
    });
    let order = priority_sort(gates, &cfg.priority)
        .into_iter()
        .map(|g| g.id.clone())
        .collect();
    search(c, faults, cfg, order, InjectionModel::Local)
}

struct Objective<'a> {
    circuit: &'a Circuit,
    faults: &'a FaultMap,
    clean: Vec<f64>,
    model: InjectionModel,
}

impl Objective<'_> {
    fn mse(&self, inj: &Injections) -> f64 {
        let out = evaluate_with(self.circuit, self.faults, inj, self.model)
            .expect("objective inputs validated up front")
            .outputs;
        output_mse(&out, &self.clean)
    }
}

fn search(
    c: &Circuit,
    faults: &FaultMap,
    cfg: &ReCoConfig,
    candidates: Vec<String>,
    model: InjectionModel,
) -> Result<ReCoOutcome> {
    faults.validate(c)?;
    let valid =
        cfg.delta > 0.0 && cfg.step > 0.0 && cfg.step <= 0.01 && cfg.coarse_step >= cfg.step;
    if !valid {
        return Err(Error::InvalidArgument(
            "ReCo search needs delta > 0 and 0 < step <= coarse step".into(),
        ));
    }
    let clean = evaluate_with(c, &FaultMap::new(), &Injections::new(), model)?.outputs;
    let obj = Objective {
        circuit: c,
        faults,
        clean,
        model,
    };
    // surface injection errors before the parallel loops
    for id in &candidates {
        evaluate_with(c, faults, &[(id.clone(), 0.0)].into(), model)?;
    }

    let uncorrected = obj.mse(&Injections::new());
    let mut iterations = 1;
    let mut best = ReCoOutcome {
        uncorrected_mse: uncorrected,
        mse: uncorrected,
        corrections: Vec::new(),
        l: 0,
        iterations: 0,
        candidates: candidates.clone(),
    };
    if uncorrected <= cfg.delta || cfg.max_blocks == 0 {
        best.iterations = iterations;
        return Ok(best);
    }

    let n = grid_len(cfg.step);
    let mut singles = Vec::with_capacity(candidates.len());
    for id in &candidates {
        let (k, e, used) = first_basin(n, cfg.delta, |k| obj.mse(&single(id, grid_point(k, n))));
        iterations += used;
        let s = grid_point(k, n);
        singles.push((id.clone(), s, e));
        if e < best.mse {
            best.mse = e;
            best.corrections = vec![Correction {
                gate: id.clone(),
                scc_i: s,
            }];
            best.l = 1;
        }
        if e <= cfg.delta {
            best.iterations = iterations;
            return Ok(best);
        }
    }

    if cfg.max_blocks >= 2 {
        singles.sort_by(|a, b| a.2.total_cmp(&b.2));
        'pairs: for i in 0..singles.len() {
            for j in i + 1..singles.len() {
                let (g1, g2) = (&singles[i].0, &singles[j].0);
                let (s1, s2, e, used) = dual_sweep(&obj, g1, g2, cfg);
                iterations += used;
                if e < best.mse {
                    best.mse = e;
                    best.corrections = vec![
                        Correction {
                            gate: g1.clone(),
                            scc_i: s1,
                        },
                        Correction {
                            gate: g2.clone(),
                            scc_i: s2,
                        },
                    ];
                    best.l = 2;
                }
                if e <= cfg.delta {
                    break 'pairs;
                }
            }
        }
    }
    best.iterations = iterations;
    Ok(best)
}

fn single(id: &str, s: f64) -> Injections {
    [(id.to_string(), s)].into()
}

/// Coarse grid over both correlations, then a fine grid over the cells
/// around the coarse minimum. Ties resolve to the lowest index.
fn dual_sweep(obj: &Objective<'_>, g1: &str, g2: &str, cfg: &ReCoConfig) -> (f64, f64, f64, usize) {
    let pair = |a: f64, b: f64| -> Injections { [(g1.to_string(), a), (g2.to_string(), b)].into() };
    let argmin = |pts: Vec<(f64, f64)>| -> ((f64, f64, f64), usize) {
        let errs: Vec<f64> = pts.par_iter().map(|&(a, b)| obj.mse(&pair(a, b))).collect();
        let mut best = (pts[0].0, pts[0].1, errs[0]);
        for (p, &e) in pts.iter().zip(&errs) {
            if e < best.2 {
                best = (p.0, p.1, e);
            }
        }
        (best, pts.len())
    };

    let nc = grid_len(cfg.coarse_step);
    let coarse: Vec<(f64, f64)> = (0..nc)
        .flat_map(|i| (0..nc).map(move |j| (grid_point(i, nc), grid_point(j, nc))))
        .collect();
    let ((c1, c2, _), used_c) = argmin(coarse);

    let span = (cfg.coarse_step / cfg.step).round() as i64;
    let n = grid_len(cfg.step);
    let centre = |s: f64| ((s + 1.0) / 2.0 * (n - 1) as f64).round() as i64;
    let axis = |s: f64| -> Vec<f64> {
        let k0 = centre(s);
        (k0 - span..=k0 + span)
            .filter(|&k| k >= 0 && k < n as i64)
            .map(|k| grid_point(k as usize, n))
            .collect()
    };
    let (a1, a2) = (axis(c1), axis(c2));
    let fine: Vec<(f64, f64)> = a1
        .iter()
        .flat_map(|&a| a2.iter().map(move |&b| (a, b)))
        .collect();
    let ((s1, s2, e), used_f) = argmin(fine);
    (s1, s2, e, used_c + used_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;

    fn single_and() -> Circuit {
        CircuitBuilder::new()
            .input("x", 0.3)
            .input("y", 0.6)
            .gate("G1", GateKind::And, &["x", "y"])
            .output("z", "G1")
            .build()
            .unwrap()
    }

    #[test]
    fn lone_gate_matches_single_gate_reco() {
        let c = single_and();
        let f = FaultMap::new().with("G1", 0.15).unwrap();
        let out = reco_miso(&c, &f, &ReCoConfig::default()).unwrap();
        assert_eq!(out.l, 1);
        assert!((out.corrections[0].scc_i + 0.762).abs() <= 0.001);
        assert!(out.mse <= 1e-6);
    }

    #[test]
    fn no_faults_no_blocks() {
        let c = single_and();
        let out = reco_miso(&c, &FaultMap::new(), &ReCoConfig::default()).unwrap();
        assert_eq!(out.l, 0);
        assert_eq!(out.mse, 0.0);
    }

    #[test]
    fn miso_needs_one_output() {
        let c = CircuitBuilder::new()
            .input("x", 0.3)
            .gate("G1", GateKind::And, &["x", "x"])
            .output("z", "G1")
            .output("w", "x")
            .build()
            .unwrap();
        assert!(reco_miso(&c, &FaultMap::new(), &ReCoConfig::default()).is_err());
    }
}
