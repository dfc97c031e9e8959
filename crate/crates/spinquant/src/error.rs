//! Shared error type for the library.

use crate::dynamics::MinimumRecord;

/// Errors surfaced by construction, parsing, quantization and descent.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix not symmetric at ({row}, {col}): {left} vs {right}")]
    Asymmetric {
        row: usize,
        col: usize,
        left: f64,
        right: f64,
    },

    #[error("degenerate quantizer: {0}")]
    DegenerateQuantizer(String),

    /// Descent hit the sweep cap. Carries the partial record so callers can
    /// inspect or resume.
    #[error("descent did not converge within {max_sweeps} sweeps")]
    NonConvergence {
        max_sweeps: usize,
        record: Box<MinimumRecord>,
    },

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("unsupported format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
