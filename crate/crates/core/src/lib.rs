//! Stochastic logic under transient faults, and correlation remodelling
//! (ReCo) to cancel the resulting output error.

pub mod bitstream;
pub mod circuit;
pub mod detector;
pub mod error;
pub mod imaging;
pub mod input_vector;
pub mod mux;
pub mod ptm;
pub mod reco;

pub use bitstream::{Bitstream, OverlapCounts};
pub use circuit::{Circuit, FaultMap, ReCoOutcome};
pub use error::{Error, Result};
pub use input_vector::InputVector;
pub use ptm::{GateKind, Ptm};
pub use reco::{ReCoProblem, ReCoSolution};
