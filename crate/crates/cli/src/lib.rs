//! Support code for the `orbitcount` binary: output formatting, exit codes
//! and the built-in self-check suite.

pub mod checks;
pub mod output;

use orbitcount_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{failed} self-check(s) failed")]
    ChecksFailed { failed: usize },
}

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;

impl CliError {
    /// 2 for bad input, 3 when a numerical method fails to converge.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::NoConvergence { .. }
                | Error::OutsideCone(_)
                | Error::SingularHessian
                | Error::DegenerateModel
                | Error::ImprimitiveMatrix { .. } => EXIT_NO_CONVERGENCE,
                _ => EXIT_VALIDATION,
            },
            CliError::Usage(_) | CliError::Read { .. } => EXIT_VALIDATION,
            CliError::Csv(_) | CliError::Io(_) | CliError::ChecksFailed { .. } => EXIT_FAILURE,
        }
    }
}
