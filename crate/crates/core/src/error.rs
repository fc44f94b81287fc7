use thiserror::Error;

use crate::sampler::RunResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// β₊ and β₋ coincide, so the effective-evidence correction is undefined.
    /// Carries the uncorrected log-evidence.
    #[error("degenerate beta bounds ({beta:.6}); uncorrected log Z = {log_z_eff:.6}")]
    DegenerateBounds { beta: f64, log_z_eff: f64 },

    /// The constrained sampler could not find a replacement point, or the
    /// iteration budget ran out. The partial run is returned for inspection.
    #[error("sampler stalled after {iterations} iterations: {reason}")]
    Stalled {
        iterations: usize,
        reason: String,
        partial: Box<RunResult>,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
