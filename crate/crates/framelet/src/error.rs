//! Crate error type.

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Filter bank order outside the supported range.
    #[error("filter bank order must be at least 1, got {0}")]
    BadOrder(usize),

    /// Grid side length is invalid for the requested operation.
    #[error("invalid grid size {n}: {reason}")]
    BadGridSize { n: usize, reason: &'static str },

    /// Decomposition depth incompatible with the grid.
    #[error("level count {levels} out of range for N={n} (need 1 <= L <= log2(N)-1)")]
    BadLevels { levels: usize, n: usize },

    /// Mismatched dimensions between two objects.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Invalid parameter value with context.
    #[error("invalid parameter {name}: {reason}")]
    BadParameter { name: &'static str, reason: String },

    /// A degenerate sample/noise configuration was requested.
    #[error("{0}")]
    DegenerateMeasurement(String),

    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn bad_param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::BadParameter {
            name,
            reason: reason.into(),
        }
    }
}
