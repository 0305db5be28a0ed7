use alloc::string::String;

/// Errors raised by the transport-process core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TpError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value outside domain at coordinate {index}: {reason}")]
    CoordinateDomain { index: usize, reason: String },

    #[error("matrix is not positive definite (leading minor {minor} failed after jitter ladder)")]
    NotPositiveDefinite { minor: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("quadrature did not converge: estimate {estimate}, error {error} after {intervals} subintervals")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("fit failed: {reason}")]
    FitFailure {
        reason: String,
        last_valid: alloc::vec::Vec<f64>,
    },
}

pub type Result<T> = core::result::Result<T, TpError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> TpError {
    TpError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
