use std::path::PathBuf;

use clap::Args;
use reco_core::circuit::{input_distribution, transfer_matrix};
use reco_core::FaultMap;
use serde::Serialize;

use crate::{emit, Failure, Format, NetlistArgs};

#[derive(Args)]
pub struct ReliabilityArgs {
    #[command(flatten)]
    netlist: NetlistArgs,
    /// Error rate applied to every gate.
    #[arg(long)]
    pe: f64,
    /// Inputs whose correlation is swept; defaults to the first two.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pair: Option<Vec<String>>,
    /// Spacing of the correlation grid over [-1, 1].
    #[arg(long, default_value_t = 0.25)]
    scc_step: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    scc: f64,
    reliability: f64,
}

pub fn run(a: &ReliabilityArgs) -> Result<(), Failure> {
    if !(a.scc_step > 0.0 && a.scc_step <= 2.0) {
        return Err(Failure::Usage(format!(
            "scc step must lie in (0, 2], got {}",
            a.scc_step
        )));
    }
    let net = a.netlist.load()?;
    let c = &net.circuit;
    let (x, y) = match &a.pair {
        Some(p) => (p[0].clone(), p[1].clone()),
        None if c.inputs().len() >= 2 => (c.inputs()[0].name.clone(), c.inputs()[1].name.clone()),
        None => {
            return Err(Failure::Validation(
                "need two inputs to sweep a correlation".into(),
            ))
        }
    };
    let faults = FaultMap::uniform(c, a.pe)?;
    let ideal = transfer_matrix(c, &FaultMap::new())?;
    let faulty = transfer_matrix(c, &faults)?;
    let n = (2.0 / a.scc_step).round() as usize + 1;
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let scc = if n == 1 {
            -1.0
        } else {
            -1.0 + 2.0 * k as f64 / (n - 1) as f64
        };
        let iv = input_distribution(&c.with_correlation(&x, &y, scc)?)?;
        rows.push(Row {
            scc,
            reliability: faulty.reliability(&ideal, &iv)?,
        });
    }
    let text = match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure::Io(e.to_string()))?)
                .expect("csv output is utf-8")
        }
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    emit(&text, a.out.as_ref())
}
