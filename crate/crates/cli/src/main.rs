mod circuit;
mod image;
mod reliability;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reco_core::circuit::{fixtures, Netlist};
use reco_core::Error;

#[derive(Parser)]
#[command(
    name = "reco",
    version,
    about = "Fault analysis and correlation remodelling for stochastic circuits"
)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, env = "RECO_SEED", default_value_t = 0, global = true)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the injected correlation of one faulty gate.
    Sweep(sweep::SweepArgs),
    /// Place correlation corrections in a netlist.
    Circuit(circuit::CircuitArgs),
    /// Reliability of a netlist across input correlations.
    Reliability(reliability::ReliabilityArgs),
    /// Contrast-stretch a PGM image through the faulty pipeline.
    Image(image::ImageArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Fixture {
    Fig7,
    Fig9,
    Fig10,
}

/// Netlist source shared by the circuit commands.
#[derive(Args)]
pub struct NetlistArgs {
    /// Netlist file.
    #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
    netlist: Option<PathBuf>,
    /// Built-in benchmark instead of a file.
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
}

impl NetlistArgs {
    pub fn load(&self) -> Result<Netlist, Failure> {
        match (&self.netlist, self.fixture) {
            (_, Some(Fixture::Fig7)) => Ok(fixtures::fig7()),
            (_, Some(Fixture::Fig9)) => Ok(fixtures::fig9()),
            (_, Some(Fixture::Fig10)) => Ok(fixtures::fig10()),
            (Some(path), None) => {
                let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
                Ok(text.parse()?)
            }
            (None, None) => Err(Failure::Usage("no netlist given".into())),
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Io(String),
    Usage(String),
    Validation(String),
}

impl Failure {
    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Validation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Usage(m) | Failure::Validation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Writes `text` to `path`, or to stdout when absent.
pub fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

pub fn check_delta(delta: f64) -> Result<(), Failure> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "delta must be positive, got {delta}"
        )))
    }
}

pub fn check_step(step: f64) -> Result<(), Failure> {
    if step > 0.0 && step <= 0.01 {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "step must lie in (0, 0.01], got {step}"
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => sweep::run(a),
        Command::Circuit(a) => circuit::run(a),
        Command::Reliability(a) => reliability::run(a),
        Command::Image(a) => image::run(a, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
