use thiserror::Error;

/// Errors raised by the truncated-operator layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite coefficient at position {position}")]
    NonFinite { position: usize },

    #[error("quadrature did not reach tolerance after {evaluations} evaluations (achieved error {achieved:e})")]
    Convergence {
        estimate: Vec<f64>,
        achieved: f64,
        evaluations: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn check_time(name: &str, t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(LabError::Domain(format!(
            "{name} must be finite and >= 0, got {t}"
        )))
    }
}

pub(crate) fn check_positive(name: &str, r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(LabError::Domain(format!(
            "{name} must be finite and > 0, got {r}"
        )))
    }
}
