use radialns_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or a domain violation.
    #[error("{0}")]
    Config(String),
    /// Integration or quadrature failed.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::StepFailure { .. } | CoreError::Quadrature { .. } => {
                Self::Numeric(e.to_string())
            }
            _ => Self::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
