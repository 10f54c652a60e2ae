use std::path::PathBuf;

use clap::Args;
use reco_core::reco::{scc_star, sweep_trace, sweep_with_step, DEFAULT_DELTA, DEFAULT_STEP};
use reco_core::{GateKind, ReCoProblem, ReCoSolution};
use serde::Serialize;

use crate::{check_delta, check_step, emit, Failure, Format};

#[derive(Args)]
pub struct SweepArgs {
    /// Two-input gate kind: and, or, xor.
    #[arg(long)]
    gate: GateKind,
    #[arg(long)]
    px: f64,
    #[arg(long)]
    py: f64,
    #[arg(long)]
    pe: f64,
    /// Correlation between the gate inputs before injection.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    scc0: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Summary {
    gate: String,
    target: f64,
    uncorrected_mse: f64,
    sweep: ReCoSolution,
    closed_form: ReCoSolution,
}

#[derive(Serialize)]
struct Report<'a> {
    summary: &'a Summary,
    trace: Vec<[f64; 2]>,
}

pub fn run(a: &SweepArgs) -> Result<(), Failure> {
    check_delta(a.delta)?;
    check_step(a.step)?;
    let problem = ReCoProblem::new(a.gate, a.px, a.py, a.pe, a.scc0)?.with_delta(a.delta)?;
    let trace = sweep_trace(&problem, a.step);
    let summary = Summary {
        gate: a.gate.to_string(),
        target: problem.target(),
        uncorrected_mse: problem.mse(a.scc0),
        sweep: sweep_with_step(&problem, a.step),
        closed_form: scc_star(&problem),
    };
    let text = match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["scc_i", "mse"])?;
            for (s, e) in &trace {
                w.serialize((s, e))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure::Io(e.to_string()))?)
                .expect("csv output is utf-8")
        }
        Format::Json => {
            let trace = trace.iter().map(|&(s, e)| [s, e]).collect();
            serde_json::to_string_pretty(&Report {
                summary: &summary,
                trace,
            })? + "\n"
        }
    };
    emit(&text, a.out.as_ref())?;
    eprintln!(
        "summary: gate={} scc_i={:.3} mse={:.3e} closed_form={:.4} closed_form_mse={:.3e} uncorrected_mse={:.3e}",
        summary.gate,
        summary.sweep.scc_i,
        summary.sweep.mse,
        summary.closed_form.scc_i,
        summary.closed_form.mse,
        summary.uncorrected_mse
    );
    Ok(())
}
