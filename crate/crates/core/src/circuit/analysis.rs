use std::cmp::Ordering;

use rand::Rng;
use serde::Serialize;

use super::eval::simulate_faults;
use super::{Circuit, FaultMap, Gate, Signal};
use crate::error::{Error, Result};
use crate::ptm::GateKind;

/// Correction priority, highest first.
pub const DEFAULT_PRIORITY: [GateKind; 3] = [GateKind::Xor, GateKind::And, GateKind::Or];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateEstimate {
    pub gate: String,
    pub p_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultReport {
    pub estimates: Vec<GateEstimate>,
    pub faulty: Vec<String>,
    /// Every path from a faulty gate to a primary output: gate ids in
    /// signal order, ending with the output name.
    pub paths: Vec<Vec<String>>,
}

/// Estimates each gate's flip rate by comparing its output with the ideal
/// function of its actual inputs over `trials` runs of `n`-bit streams.
pub fn fault_evaluation<R: Rng + ?Sized>(
    c: &Circuit,
    faults: &FaultMap,
    trials: usize,
    n: usize,
    threshold: f64,
    rng: &mut R,
) -> Result<FaultReport> {
    if trials == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "fault evaluation needs at least one bit".into(),
        ));
    }
    let mut flips = vec![0usize; c.gates().len()];
    for _ in 0..trials {
        let sim = simulate_faults(c, faults, n, rng)?;
        for (g, f) in flips.iter_mut().enumerate() {
            *f += sim.gates[g].xor(&sim.ideal[g])?.count_ones();
        }
    }
    let total = (trials * n) as f64;
    let estimates: Vec<GateEstimate> = c
        .gates()
        .iter()
        .zip(&flips)
        .map(|(g, &f)| GateEstimate {
            gate: g.id.clone(),
            p_e: f as f64 / total,
        })
        .collect();
    let faulty: Vec<String> = estimates
        .iter()
        .filter(|e| e.p_e > threshold)
        .map(|e| e.gate.clone())
        .collect();
    let mut paths = Vec::new();
    for id in &faulty {
        let g = c
            .gate_index(id)
            .expect("estimate ids come from the circuit");
        collect_paths(c, g, &mut vec![id.clone()], &mut paths);
    }
    Ok(FaultReport {
        estimates,
        faulty,
        paths,
    })
}

fn collect_paths(c: &Circuit, g: usize, prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    for o in c.outputs() {
        if o.source == Signal::Gate(g) {
            let mut p = prefix.clone();
            p.push(o.name.clone());
            out.push(p);
        }
    }
    for (k, gate) in c.gates().iter().enumerate().skip(g + 1) {
        if gate.sources.contains(&Signal::Gate(g)) {
            prefix.push(gate.id.clone());
            collect_paths(c, k, prefix, out);
            prefix.pop();
        }
    }
}

/// Level-1 gates connected to an output that some faulty gate corrupts.
/// Injecting at any of them can move the corrupted output.
pub fn is_connected(c: &Circuit, faulty: &[String]) -> Vec<String> {
    let mut affected = vec![false; c.outputs().len()];
    for id in faulty {
        if let Some(f) = c.gate_index(id) {
            for k in c.outputs_reached(f) {
                affected[k] = true;
            }
        }
    }
    c.gates()
        .iter()
        .enumerate()
        .filter(|(k, g)| g.level == 1 && c.outputs_reached(*k).iter().any(|&o| affected[o]))
        .map(|(_, g)| g.id.clone())
        .collect()
}

/// Stable sort by kind priority, then by id (numeric suffixes compared as
/// numbers). Kinds missing from `order` go last.
pub fn priority_sort<'a>(
    gates: impl IntoIterator<Item = &'a Gate>,
    order: &[GateKind],
) -> Vec<&'a Gate> {
    let rank = |k: GateKind| order.iter().position(|&o| o == k).unwrap_or(order.len());
    let mut v: Vec<&Gate> = gates.into_iter().collect();
    v.sort_by(|a, b| {
        rank(a.kind)
            .cmp(&rank(b.kind))
            .then_with(|| natural_cmp(&a.id, &b.id))
    });
    v
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    let split = |s: &str| {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        (s[..cut].to_string(), s[cut..].parse::<u64>().ok())
    };
    split(a).cmp(&split(b)).then_with(|| a.cmp(b))
}
