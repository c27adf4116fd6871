//! Experiment driver for the spin-chain dephasing model: configuration,
//! the report-producing commands and the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("acceptance failure: {0}")]
    Acceptance(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
        }
    }
}

impl From<dephasing_core::Error> for CliError {
    fn from(e: dephasing_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}
