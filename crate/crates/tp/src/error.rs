use tp_core::TpError;

/// Command failure with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("download failed: {0}")]
    Download(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Download(_) => 5,
        }
    }
}

impl From<TpError> for CliError {
    fn from(e: TpError) -> Self {
        match e {
            TpError::InvalidParameter { .. }
            | TpError::Validation(_)
            | TpError::DimensionMismatch { .. }
            | TpError::NotImplemented(_)
            | TpError::Domain(_)
            | TpError::CoordinateDomain { .. } => CliError::Validation(e.to_string()),
            TpError::NotPositiveDefinite { .. }
            | TpError::Numerical(_)
            | TpError::QuadratureNonConvergence { .. }
            | TpError::FitFailure { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
