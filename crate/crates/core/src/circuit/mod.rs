//! Combinational circuits of two-input stochastic gates.
//!
//! A [`Circuit`] is a DAG of gates over named primary inputs. Primary inputs
//! may be pairwise correlated; the correlated pairs must form a forest so
//! the joint input distribution is well defined.

mod analysis;
mod eval;
pub mod fixtures;
mod netlist;
mod search;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{check_correlation, check_error_rate, check_probability, Error, Result};
use crate::ptm::GateKind;

pub use analysis::{fault_evaluation, is_connected, priority_sort, FaultReport, GateEstimate};
pub use eval::{
    evaluate, evaluate_monte_carlo, evaluate_with, input_distribution, output_mse, transfer_matrix,
    Evaluation, InjectionModel, Injections,
};
pub use netlist::{parse_netlist, Netlist};
pub use search::{reco_mimo, reco_miso, ReCoConfig, ReCoOutcome};

/// Upper bound on simultaneously live wires in exact evaluation.
pub const MAX_LIVE_WIRES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    Input(usize),
    Gate(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub name: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub id: String,
    pub kind: GateKind,
    pub sources: Vec<Signal>,
    /// 1 for gates fed only by primary inputs.
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub source: Signal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputCorrelation {
    pub a: usize,
    pub b: usize,
    pub scc: f64,
}

/// Validated circuit with gates stored in topological order.
#[derive(Debug, Clone)]
pub struct Circuit {
    inputs: Vec<Input>,
    gates: Vec<Gate>,
    outputs: Vec<Output>,
    correlations: Vec<InputCorrelation>,
    names: HashMap<String, Signal>,
}

impl Circuit {
    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn correlations(&self) -> &[InputCorrelation] {
        &self.correlations
    }

    pub fn signal(&self, name: &str) -> Option<Signal> {
        self.names.get(name).copied()
    }

    pub fn gate_index(&self, id: &str) -> Option<usize> {
        match self.signal(id) {
            Some(Signal::Gate(g)) => Some(g),
            _ => None,
        }
    }

    pub fn gate(&self, id: &str) -> Option<&Gate> {
        self.gate_index(id).map(|g| &self.gates[g])
    }

    pub fn signal_name(&self, s: Signal) -> &str {
        match s {
            Signal::Input(i) => &self.inputs[i].name,
            Signal::Gate(g) => &self.gates[g].id,
        }
    }

    pub fn depth(&self) -> usize {
        self.gates.iter().map(|g| g.level).max().unwrap_or(0)
    }

    /// Copy with the correlation between two primary inputs set (or added).
    pub fn with_correlation(&self, a: &str, b: &str, scc: f64) -> Result<Circuit> {
        let (ia, ib) = (self.input_index(a)?, self.input_index(b)?);
        let mut c = self.clone();
        c.correlations.retain(|k| !same_pair(k, ia, ib));
        c.correlations.push(InputCorrelation { a: ia, b: ib, scc });
        validate_correlations(&c.inputs, &c.correlations)?;
        Ok(c)
    }

    fn input_index(&self, name: &str) -> Result<usize> {
        match self.signal(name) {
            Some(Signal::Input(i)) => Ok(i),
            _ => Err(Error::Validation(format!(
                "`{name}` is not a primary input"
            ))),
        }
    }

    /// Gates reachable from `g` (excluding `g`).
    pub(crate) fn fanout_cone(&self, g: usize) -> Vec<bool> {
        let mut hit = vec![false; self.gates.len()];
        // topological order: a single forward pass suffices
        for (k, gate) in self.gates.iter().enumerate().skip(g + 1) {
            hit[k] = gate.sources.iter().any(|&s| match s {
                Signal::Gate(j) => j == g || hit[j],
                Signal::Input(_) => false,
            });
        }
        hit
    }

    /// Indices of outputs driven by `g` directly or through its fanout cone.
    pub(crate) fn outputs_reached(&self, g: usize) -> Vec<usize> {
        let cone = self.fanout_cone(g);
        self.outputs
            .iter()
            .enumerate()
            .filter(|(_, o)| matches!(o.source, Signal::Gate(j) if j == g || cone[j]))
            .map(|(k, _)| k)
            .collect()
    }
}

fn same_pair(k: &InputCorrelation, a: usize, b: usize) -> bool {
    (k.a == a && k.b == b) || (k.a == b && k.b == a)
}

/// Incremental construction; [`CircuitBuilder::build`] resolves names,
/// orders gates topologically and validates the result.
#[derive(Debug, Clone, Default)]
pub struct CircuitBuilder {
    inputs: Vec<Input>,
    gates: Vec<(String, GateKind, Vec<String>)>,
    outputs: Vec<(String, String)>,
    correlations: Vec<(String, String, f64)>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(mut self, name: &str, prob: f64) -> Self {
        self.inputs.push(Input {
            name: name.to_string(),
            prob,
        });
        self
    }

    pub fn gate(mut self, id: &str, kind: GateKind, sources: &[&str]) -> Self {
        self.gates.push((
            id.to_string(),
            kind,
            sources.iter().map(|s| s.to_string()).collect(),
        ));
        self
    }

    pub fn output(mut self, name: &str, source: &str) -> Self {
        self.outputs.push((name.to_string(), source.to_string()));
        self
    }

    pub fn correlate(mut self, a: &str, b: &str, scc: f64) -> Self {
        self.correlations.push((a.to_string(), b.to_string(), scc));
        self
    }

    pub fn build(self) -> Result<Circuit> {
        if self.inputs.is_empty() {
            return Err(Error::Validation("circuit has no inputs".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::Validation("circuit has no outputs".into()));
        }
        let mut declared: HashMap<&str, Option<usize>> = HashMap::new();
        for inp in &self.inputs {
            check_probability(&inp.name, inp.prob).map_err(|e| Error::Validation(e.to_string()))?;
            if declared.insert(&inp.name, None).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate signal `{}`",
                    inp.name
                )));
            }
        }
        for (k, (id, kind, srcs)) in self.gates.iter().enumerate() {
            if declared.insert(id, Some(k)).is_some() {
                return Err(Error::Validation(format!("duplicate signal `{id}`")));
            }
            if srcs.len() != kind.arity() {
                return Err(Error::Validation(format!(
                    "gate `{id}`: {kind} takes {} inputs, got {}",
                    kind.arity(),
                    srcs.len()
                )));
            }
        }
        for (id, _, srcs) in &self.gates {
            if let Some(s) = srcs.iter().find(|s| !declared.contains_key(s.as_str())) {
                return Err(Error::Validation(format!(
                    "gate `{id}`: unknown source `{s}`"
                )));
            }
        }

        // Kahn's algorithm, preferring declaration order among ready gates
        let n = self.gates.len();
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        while order.len() < n {
            let next = (0..n).find(|&k| {
                !placed[k]
                    && self.gates[k].2.iter().all(|s| match declared[s.as_str()] {
                        None => true,
                        Some(j) => placed[j],
                    })
            });
            match next {
                Some(k) => {
                    placed[k] = true;
                    order.push(k);
                }
                None => {
                    let stuck = (0..n)
                        .find(|&k| !placed[k])
                        .map(|k| self.gates[k].0.clone());
                    return Err(Error::Validation(format!(
                        "combinational loop through gate `{}`",
                        stuck.unwrap_or_default()
                    )));
                }
            }
        }

        let mut names: HashMap<String, Signal> = HashMap::new();
        for (i, inp) in self.inputs.iter().enumerate() {
            names.insert(inp.name.clone(), Signal::Input(i));
        }
        for (pos, &k) in order.iter().enumerate() {
            names.insert(self.gates[k].0.clone(), Signal::Gate(pos));
        }
        let mut gates: Vec<Gate> = Vec::with_capacity(n);
        for &k in &order {
            let (id, kind, srcs) = &self.gates[k];
            let sources: Vec<Signal> = srcs.iter().map(|s| names[s.as_str()]).collect();
            let level = 1 + sources
                .iter()
                .map(|s| match *s {
                    Signal::Input(_) => 0,
                    Signal::Gate(j) => gates[j].level,
                })
                .max()
                .unwrap_or(0);
            gates.push(Gate {
                id: id.clone(),
                kind: *kind,
                sources,
                level,
            });
        }

        let mut outputs = Vec::with_capacity(self.outputs.len());
        for (name, src) in &self.outputs {
            if outputs.iter().any(|o: &Output| &o.name == name) {
                return Err(Error::Validation(format!("duplicate output `{name}`")));
            }
            let source = *names.get(src).ok_or_else(|| {
                Error::Validation(format!("output `{name}`: unknown source `{src}`"))
            })?;
            outputs.push(Output {
                name: name.clone(),
                source,
            });
        }

        let mut correlations = Vec::with_capacity(self.correlations.len());
        for (a, b, scc) in &self.correlations {
            let idx = |s: &str| match names.get(s) {
                Some(Signal::Input(i)) => Ok(*i),
                _ => Err(Error::Validation(format!(
                    "correlation: `{s}` is not a primary input"
                ))),
            };
            let (ia, ib) = (idx(a)?, idx(b)?);
            if correlations.iter().any(|k| same_pair(k, ia, ib)) {
                return Err(Error::Validation(format!(
                    "correlation `{a}`/`{b}` given twice"
                )));
            }
            correlations.push(InputCorrelation {
                a: ia,
                b: ib,
                scc: *scc,
            });
        }
        validate_correlations(&self.inputs, &correlations)?;

        Ok(Circuit {
            inputs: self.inputs,
            gates,
            outputs,
            correlations,
            names,
        })
    }
}

fn validate_correlations(inputs: &[Input], pairs: &[InputCorrelation]) -> Result<()> {
    let mut parent: Vec<usize> = (0..inputs.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for k in pairs {
        check_correlation(k.scc).map_err(|e| Error::Validation(e.to_string()))?;
        if k.a == k.b {
            return Err(Error::Validation(format!(
                "input `{}` correlated with itself",
                inputs[k.a].name
            )));
        }
        let (ra, rb) = (root(&mut parent, k.a), root(&mut parent, k.b));
        if ra == rb {
            return Err(Error::Validation(format!(
                "correlations between `{}` and `{}` close a cycle",
                inputs[k.a].name, inputs[k.b].name
            )));
        }
        parent[ra] = rb;
    }
    Ok(())
}

/// Per-gate transient error rates; gates not listed are fault-free.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FaultMap {
    rates: BTreeMap<String, f64>,
}

impl FaultMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, gate: &str, p_e: f64) -> Result<()> {
        check_error_rate(p_e)?;
        self.rates.insert(gate.to_string(), p_e);
        Ok(())
    }

    pub fn with(mut self, gate: &str, p_e: f64) -> Result<Self> {
        self.insert(gate, p_e)?;
        Ok(self)
    }

    /// Every gate of `c` at rate `p_e`.
    pub fn uniform(c: &Circuit, p_e: f64) -> Result<Self> {
        let mut m = Self::new();
        for g in c.gates() {
            m.insert(&g.id, p_e)?;
        }
        Ok(m)
    }

    pub fn get(&self, gate: &str) -> f64 {
        self.rates.get(gate).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.rates.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.rates.values().all(|&p| p == 0.0)
    }

    /// Ids with a non-zero rate, in circuit order.
    pub fn faulty(&self, c: &Circuit) -> Vec<String> {
        c.gates()
            .iter()
            .filter(|g| self.get(&g.id) > 0.0)
            .map(|g| g.id.clone())
            .collect()
    }

    pub fn validate(&self, c: &Circuit) -> Result<()> {
        match self.rates.keys().find(|id| c.gate_index(id).is_none()) {
            Some(id) => Err(Error::Validation(format!("fault on unknown gate `{id}`"))),
            None => Ok(()),
        }
    }

    pub(crate) fn per_gate(&self, c: &Circuit) -> Vec<f64> {
        c.gates().iter().map(|g| self.get(&g.id)).collect()
    }
}
