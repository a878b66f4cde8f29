//! Command failures and their exit codes.

use std::path::Path;
use std::process::ExitCode;

use nbldpc::Error;

/// Exit codes; 0 is success.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Config = 1,
    Construction = 2,
    Io = 3,
    Budget = 4,
    Invariant = 5,
    Verify = 6,
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Failure {
            exit,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Failure::new(Exit::Config, message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(Exit::Io, format!("{}: {e}", path.display()))
    }

    pub fn code(&self) -> ExitCode {
        ExitCode::from(self.exit as u8)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match &e {
            Error::Config(_) | Error::Domain(_) | Error::Dimension(_) | Error::Contract(_) => Exit::Config,
            Error::Construction(_) => Exit::Construction,
            Error::Io(_) | Error::Json(_) | Error::Parse { .. } => Exit::Io,
            Error::BudgetExceeded { .. } | Error::EnumerationTooLarge { .. } => Exit::Budget,
            Error::InvariantBreach(_) | Error::Inconsistent { .. } | Error::Internal(_) => Exit::Invariant,
        };
        Failure::new(exit, e.to_string())
    }
}
