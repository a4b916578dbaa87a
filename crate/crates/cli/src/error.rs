use std::fmt::Display;

use galem_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("io error: {0}")]
    Io(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(key: &str, e: impl Display) -> Self {
        CliError::Config(format!("{key}: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                Error::NoConvergence { .. }
                | Error::SingularLinearization(_)
                | Error::NormDrift(_)
                | Error::BlowUp(_),
            ) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
