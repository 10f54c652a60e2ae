use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("correlation is indeterminate when a stream value is 0 or 1")]
    IndeterminateCorrelation,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid circuit: {0}")]
    Validation(String),
    #[error("image error: {0}")]
    Image(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "{name} = {p} is not a probability"
        )));
    }
    Ok(())
}

pub(crate) fn check_error_rate(p_e: f64) -> Result<()> {
    if !(0.0..0.5).contains(&p_e) || p_e.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "error rate {p_e} outside [0, 0.5)"
        )));
    }
    Ok(())
}

pub(crate) fn check_correlation(scc: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&scc) || scc.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "correlation {scc} outside [-1, 1]"
        )));
    }
    Ok(())
}
