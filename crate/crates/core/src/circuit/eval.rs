//! Exact and Monte Carlo evaluation.
//!
//! Exact mode carries the joint distribution of every live wire through the
//! gates in topological order, so reconvergent fanout and correlated inputs
//! are handled without independence assumptions. A wire is marginalised
//! out after its last reader.

use std::collections::BTreeMap;

use rand::Rng;

use super::{Circuit, FaultMap, InputCorrelation, Signal, MAX_LIVE_WIRES};
use crate::bitstream::{generate, inject_bitflips, Bitstream};
use crate::error::{check_correlation, Error, Result};
use crate::input_vector::{correlated_pair, InputVector};
use crate::ptm::Ptm;

/// Correlation injected at the inputs of a gate, keyed by gate id.
pub type Injections = BTreeMap<String, f64>;

/// How an injected correlation is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InjectionModel {
    /// A gate fed by two distinct primary inputs gets them regenerated with
    /// the requested correlation, so every reader of those inputs sees the
    /// new joint distribution. Other gates fall back to a local correlator.
    #[default]
    RederiveInputs,
    /// Local correlator: the first operand is kept and the second is replaced,
    /// for this gate only, by a stream of equal value with the requested
    /// correlation to the first.
    Local,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Probability of a one at each primary output.
    pub outputs: Vec<f64>,
    /// Joint output distribution, first output as most significant bit.
    pub joint: Vec<f64>,
}

/// Exact output probabilities with faults and no injection.
pub fn evaluate(c: &Circuit, faults: &FaultMap) -> Result<Vec<f64>> {
    Ok(evaluate_with(c, faults, &Injections::new(), InjectionModel::default())?.outputs)
}

pub fn evaluate_with(
    c: &Circuit,
    faults: &FaultMap,
    injections: &Injections,
    model: InjectionModel,
) -> Result<Evaluation> {
    let plan = Plan::new(c, faults, injections, model)?;
    let init = forest_joint(c, &plan.pairs);
    plan.run(init)
}

/// Sum of squared differences over outputs.
pub fn output_mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Circuit transfer matrix: one row per primary-input combination (first
/// input most significant), one column per output combination.
pub fn transfer_matrix(c: &Circuit, faults: &FaultMap) -> Result<Ptm> {
    let ni = c.inputs().len();
    if ni + c.outputs().len() > 12 {
        return Err(Error::Validation(
            "transfer matrix limited to 12 input plus output wires".into(),
        ));
    }
    let plan = Plan::new(c, faults, &Injections::new(), InjectionModel::Local)?;
    let rows = 1usize << ni;
    let cols = 1usize << c.outputs().len();
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let mut init = vec![0.0; rows];
        init[msb_to_internal(r, ni)] = 1.0;
        data.extend(plan.run(init)?.joint);
    }
    Ptm::new(rows, cols, data)
}

/// Joint primary-input distribution, first input most significant.
pub fn input_distribution(c: &Circuit) -> Result<InputVector> {
    let ni = c.inputs().len();
    let internal = forest_joint(c, c.correlations());
    let probs = (0..1usize << ni)
        .map(|r| internal[msb_to_internal(r, ni)])
        .collect();
    InputVector::new(probs)
}

/// Bit-level simulation with `n`-bit streams.
pub fn evaluate_monte_carlo<R: Rng + ?Sized>(
    c: &Circuit,
    faults: &FaultMap,
    injections: &Injections,
    model: InjectionModel,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let plan = Plan::new(c, faults, injections, model)?;
    let sim = simulate(c, &plan, n, rng)?;
    Ok(c.outputs()
        .iter()
        .map(|o| sim.stream(o.source).value())
        .collect())
}

pub(crate) struct Simulation {
    pub inputs: Vec<Bitstream>,
    pub gates: Vec<Bitstream>,
    /// Gate outputs before bit flips, from the actual (possibly faulty)
    /// gate inputs.
    pub ideal: Vec<Bitstream>,
}

impl Simulation {
    pub fn stream(&self, s: Signal) -> &Bitstream {
        match s {
            Signal::Input(i) => &self.inputs[i],
            Signal::Gate(g) => &self.gates[g],
        }
    }
}

pub(crate) fn simulate_faults<R: Rng + ?Sized>(
    c: &Circuit,
    faults: &FaultMap,
    n: usize,
    rng: &mut R,
) -> Result<Simulation> {
    let plan = Plan::new(c, faults, &Injections::new(), InjectionModel::Local)?;
    simulate(c, &plan, n, rng)
}

fn simulate<R: Rng + ?Sized>(
    c: &Circuit,
    plan: &Plan<'_>,
    n: usize,
    rng: &mut R,
) -> Result<Simulation> {
    let inputs = forest_streams(c, &plan.pairs, n, rng)?;
    let mut gates: Vec<Bitstream> = Vec::with_capacity(c.gates().len());
    let mut ideal: Vec<Bitstream> = Vec::with_capacity(c.gates().len());
    for (g, gate) in c.gates().iter().enumerate() {
        let get = |s: Signal, gates: &[Bitstream]| match s {
            Signal::Input(i) => inputs[i].clone(),
            Signal::Gate(j) => gates[j].clone(),
        };
        let mut ops: Vec<Bitstream> = gate.sources.iter().map(|&s| get(s, &gates)).collect();
        if let Some(scc) = plan.local[g] {
            ops[1] = correlate_to(&ops[0], ops[1].value(), scc, rng)?;
        }
        let bits: Vec<bool> = (0..n)
            .map(|k| {
                let row: Vec<bool> = ops.iter().map(|o| o.bits()[k]).collect();
                gate.kind.apply(&row)
            })
            .collect();
        let clean = Bitstream::from_bits(bits)?;
        gates.push(inject_bitflips(&clean, plan.faults[g], rng)?);
        ideal.push(clean);
    }
    Ok(Simulation {
        inputs,
        gates,
        ideal,
    })
}

/// Stream of value close to `p_b` whose joint with `a` follows the
/// correlated pair distribution.
fn correlate_to<R: Rng + ?Sized>(
    a: &Bitstream,
    p_b: f64,
    scc: f64,
    rng: &mut R,
) -> Result<Bitstream> {
    let cond = conditional(a.value(), p_b, scc);
    let bits = a
        .bits()
        .iter()
        .map(|&x| rng.gen::<f64>() < cond[x as usize])
        .collect();
    Bitstream::from_bits(bits)
}

/// `P(b = 1 | a = 0)` and `P(b = 1 | a = 1)` under the correlated pair.
fn conditional(p_a: f64, p_b: f64, scc: f64) -> [f64; 2] {
    let j = correlated_pair(p_a, p_b, scc);
    let div = |num: f64, den: f64| {
        if den > 0.0 {
            (num / den).clamp(0.0, 1.0)
        } else {
            0.0
        }
    };
    [div(j[1], j[0] + j[1]), div(j[3], j[2] + j[3])]
}

fn forest_streams<R: Rng + ?Sized>(
    c: &Circuit,
    pairs: &[InputCorrelation],
    n: usize,
    rng: &mut R,
) -> Result<Vec<Bitstream>> {
    let ni = c.inputs().len();
    let mut streams: Vec<Option<Bitstream>> = vec![None; ni];
    for root in 0..ni {
        if streams[root].is_some() {
            continue;
        }
        streams[root] = Some(generate(c.inputs()[root].prob, n, rng)?);
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for k in pairs {
                let (v, scc) = match (k.a == u, k.b == u) {
                    (true, _) => (k.b, k.scc),
                    (_, true) => (k.a, k.scc),
                    _ => continue,
                };
                if streams[v].is_some() {
                    continue;
                }
                let parent = streams[u].as_ref().expect("visited");
                let cond = conditional(c.inputs()[u].prob, c.inputs()[v].prob, scc);
                let bits = parent
                    .bits()
                    .iter()
                    .map(|&x| rng.gen::<f64>() < cond[x as usize])
                    .collect();
                streams[v] = Some(Bitstream::from_bits(bits)?);
                stack.push(v);
            }
        }
    }
    Ok(streams
        .into_iter()
        .map(|s| s.expect("every input visited"))
        .collect())
}

/// Input joint over internal indices (input `i` at bit `i`): product of
/// marginals times the pairwise dependence ratio of every correlated pair.
fn forest_joint(c: &Circuit, pairs: &[InputCorrelation]) -> Vec<f64> {
    let ni = c.inputs().len();
    let marg = |i: usize, bit: bool| {
        let p = c.inputs()[i].prob;
        if bit {
            p
        } else {
            1.0 - p
        }
    };
    let tables: Vec<[f64; 4]> = pairs
        .iter()
        .map(|k| correlated_pair(c.inputs()[k.a].prob, c.inputs()[k.b].prob, k.scc))
        .collect();
    (0..1usize << ni)
        .map(|s| {
            let bit = |i: usize| s >> i & 1 == 1;
            let mut p: f64 = (0..ni).map(|i| marg(i, bit(i))).product();
            if p == 0.0 {
                return 0.0;
            }
            for (k, t) in pairs.iter().zip(&tables) {
                let (x, y) = (bit(k.a), bit(k.b));
                p *= t[(x as usize) << 1 | y as usize] / (marg(k.a, x) * marg(k.b, y));
            }
            p
        })
        .collect()
}

fn msb_to_internal(r: usize, n: usize) -> usize {
    (0..n)
        .filter(|&i| r >> (n - 1 - i) & 1 == 1)
        .map(|i| 1 << i)
        .sum()
}

struct Plan<'c> {
    circuit: &'c Circuit,
    faults: Vec<f64>,
    local: Vec<Option<f64>>,
    pairs: Vec<InputCorrelation>,
}

impl<'c> Plan<'c> {
    fn new(
        c: &'c Circuit,
        faults: &FaultMap,
        injections: &Injections,
        model: InjectionModel,
    ) -> Result<Self> {
        faults.validate(c)?;
        let mut local = vec![None; c.gates().len()];
        let mut pairs = c.correlations().to_vec();
        for (id, &scc) in injections {
            check_correlation(scc)?;
            let g = c
                .gate_index(id)
                .ok_or_else(|| Error::Validation(format!("injection at unknown gate `{id}`")))?;
            let gate = &c.gates()[g];
            if gate.kind.arity() != 2 {
                return Err(Error::Validation(format!(
                    "cannot inject correlation at {} gate `{id}`",
                    gate.kind
                )));
            }
            if model == InjectionModel::RederiveInputs {
                if let [Signal::Input(a), Signal::Input(b)] = gate.sources[..] {
                    if a != b {
                        let mut trial = pairs.clone();
                        trial.retain(|k| !super::same_pair(k, a, b));
                        trial.push(InputCorrelation { a, b, scc });
                        if super::validate_correlations(c.inputs(), &trial).is_ok() {
                            pairs = trial;
                            continue;
                        }
                    }
                }
            }
            local[g] = Some(scc);
        }
        Ok(Self {
            circuit: c,
            faults: faults.per_gate(c),
            local,
            pairs,
        })
    }

    fn run(&self, init: Vec<f64>) -> Result<Evaluation> {
        let c = self.circuit;
        let ni = c.inputs().len();
        let slot = |s: Signal| match s {
            Signal::Input(i) => i,
            Signal::Gate(g) => ni + g,
        };
        let nslots = ni + c.gates().len();
        let mut last_use = vec![None; nslots];
        for (g, gate) in c.gates().iter().enumerate() {
            for &s in &gate.sources {
                last_use[slot(s)] = Some(g);
            }
        }
        let mut keep = vec![false; nslots];
        for o in c.outputs() {
            keep[slot(o.source)] = true;
        }

        let mut joint = Joint {
            wires: (0..ni).collect(),
            probs: init,
        };
        for i in 0..ni {
            if last_use[i].is_none() && !keep[i] {
                joint.drop_wire(i);
            }
        }
        for (g, gate) in c.gates().iter().enumerate() {
            if joint.wires.len() >= MAX_LIVE_WIRES {
                return Err(Error::Validation(format!(
                    "more than {MAX_LIVE_WIRES} live wires at gate `{}`",
                    gate.id
                )));
            }
            let pos: Vec<usize> = gate
                .sources
                .iter()
                .map(|&s| joint.position(slot(s)))
                .collect();
            let cond = self.local[g]
                .map(|scc| conditional(joint.marginal(pos[0]), joint.marginal(pos[1]), scc));
            let p_e = self.faults[g];
            let kind = gate.kind;
            joint.push_wire(ni + g, |s| {
                let bit = |p: usize| s >> p & 1 == 1;
                let q = match cond {
                    Some(cond) => {
                        let a = bit(pos[0]);
                        let pb = cond[a as usize];
                        pb * f64::from(u8::from(kind.apply(&[a, true])))
                            + (1.0 - pb) * f64::from(u8::from(kind.apply(&[a, false])))
                    }
                    None => {
                        let row: Vec<bool> = pos.iter().map(|&p| bit(p)).collect();
                        f64::from(u8::from(kind.apply(&row)))
                    }
                };
                p_e + (1.0 - 2.0 * p_e) * q
            });
            for &s in &gate.sources {
                let sl = slot(s);
                if last_use[sl] == Some(g) && !keep[sl] && joint.wires.contains(&sl) {
                    joint.drop_wire(sl);
                }
            }
            if last_use[ni + g].is_none() && !keep[ni + g] {
                joint.drop_wire(ni + g);
            }
        }

        let out_pos: Vec<usize> = c
            .outputs()
            .iter()
            .map(|o| joint.position(slot(o.source)))
            .collect();
        let no = out_pos.len();
        let mut outputs = vec![0.0; no];
        let mut dist = vec![0.0; 1 << no];
        for (s, &p) in joint.probs.iter().enumerate() {
            let mut idx = 0;
            for (k, &pos) in out_pos.iter().enumerate() {
                if s >> pos & 1 == 1 {
                    outputs[k] += p;
                    idx |= 1 << (no - 1 - k);
                }
            }
            dist[idx] += p;
        }
        Ok(Evaluation {
            outputs,
            joint: dist,
        })
    }
}

/// Distribution over the live wires; bit `k` of an index is `wires[k]`.
struct Joint {
    wires: Vec<usize>,
    probs: Vec<f64>,
}

impl Joint {
    fn position(&self, slot: usize) -> usize {
        self.wires
            .iter()
            .position(|&w| w == slot)
            .expect("wire is live")
    }

    fn marginal(&self, pos: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(s, _)| s >> pos & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    /// Appends a wire that is 1 with probability `one(state)`.
    fn push_wire(&mut self, slot: usize, one: impl Fn(usize) -> f64) {
        let len = self.probs.len();
        let mut next = vec![0.0; 2 * len];
        for (s, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let q = one(s);
            next[s] = p * (1.0 - q);
            next[s | len] = p * q;
        }
        self.probs = next;
        self.wires.push(slot);
    }

    fn drop_wire(&mut self, slot: usize) {
        let k = self.position(slot);
        let low = (1usize << k) - 1;
        let mut next = vec![0.0; self.probs.len() / 2];
        for (s, &p) in self.probs.iter().enumerate() {
            next[(s & low) | (s >> (k + 1)) << k] += p;
        }
        self.probs = next;
        self.wires.remove(k);
    }
}
