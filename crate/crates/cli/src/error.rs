use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or invalid input; exit status 2.
    #[error("{0}")]
    Config(String),
    /// Failure while doing the work; exit status 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl From<webtv_costmodel::CostError> for CliError {
    fn from(e: webtv_costmodel::CostError) -> Self {
        match e {
            webtv_costmodel::CostError::Io(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
