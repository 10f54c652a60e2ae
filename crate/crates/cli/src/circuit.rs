use std::path::PathBuf;

use clap::{Args, ValueEnum};
use reco_core::circuit::{
    evaluate, evaluate_with, output_mse, reco_mimo, reco_miso, InjectionModel, ReCoConfig,
};
use reco_core::reco::DEFAULT_DELTA;
use reco_core::ReCoOutcome;
use serde::Serialize;

use crate::{check_delta, check_step, emit, Failure, NetlistArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Miso,
    Mimo,
}

#[derive(Args)]
pub struct CircuitArgs {
    #[command(flatten)]
    netlist: NetlistArgs,
    /// Search strategy; defaults to miso for one output, mimo otherwise.
    #[arg(long, value_enum)]
    algorithm: Option<Algorithm>,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long)]
    step: Option<f64>,
    /// Extra or overriding fault, as GATE=P_E. Repeatable.
    #[arg(long = "fault", value_name = "GATE=P_E")]
    faults: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report {
    algorithm: Algorithm,
    delta: f64,
    faults: Vec<(String, f64)>,
    outputs: Vec<String>,
    clean: Vec<f64>,
    faulty: Vec<f64>,
    corrected: Vec<f64>,
    #[serde(flatten)]
    outcome: ReCoOutcome,
}

fn parse_fault(spec: &str) -> Result<(String, f64), Failure> {
    let (gate, p) = spec
        .split_once('=')
        .ok_or_else(|| Failure::Usage(format!("fault `{spec}` is not GATE=P_E")))?;
    let p = p
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("bad error rate in `{spec}`")))?;
    Ok((gate.trim().to_string(), p))
}

pub fn run(a: &CircuitArgs) -> Result<(), Failure> {
    check_delta(a.delta)?;
    let mut cfg = ReCoConfig {
        delta: a.delta,
        ..ReCoConfig::default()
    };
    if let Some(step) = a.step {
        check_step(step)?;
        cfg.step = step;
    }
    let mut net = a.netlist.load()?;
    for spec in &a.faults {
        let (gate, p) = parse_fault(spec)?;
        net.faults.insert(&gate, p)?;
    }
    let c = &net.circuit;
    net.faults.validate(c)?;
    let algorithm = a.algorithm.unwrap_or(if c.outputs().len() == 1 {
        Algorithm::Miso
    } else {
        Algorithm::Mimo
    });
    let (outcome, model) = match algorithm {
        Algorithm::Miso => (
            reco_miso(c, &net.faults, &cfg)?,
            InjectionModel::RederiveInputs,
        ),
        Algorithm::Mimo => (reco_mimo(c, &net.faults, &cfg)?, InjectionModel::Local),
    };
    let clean = evaluate(c, &reco_core::FaultMap::new())?;
    let faulty = evaluate(c, &net.faults)?;
    let corrected = evaluate_with(c, &net.faults, &outcome.injections(), model)?.outputs;
    debug_assert!((output_mse(&clean, &corrected) - outcome.mse).abs() < 1e-12);
    let report = Report {
        algorithm,
        delta: a.delta,
        faults: net
            .faults
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(g, p)| (g.to_string(), p))
            .collect(),
        outputs: c.outputs().iter().map(|o| o.name.clone()).collect(),
        clean,
        faulty,
        corrected,
        outcome,
    };
    emit(
        &(serde_json::to_string_pretty(&report)? + "\n"),
        a.out.as_ref(),
    )
}
