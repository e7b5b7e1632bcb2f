//! Failures of a command-line run and their process exit codes.

use thiserror::Error;

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code of invalid input or configuration.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code of a solver or fit that did not converge.
pub const EXIT_SOLVER: i32 = 3;
/// Exit code of a failed verification.
pub const EXIT_VERIFICATION: i32 = 4;

/// Failure of a run.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration, arguments or input file.
    #[error("invalid input: {0}")]
    Validation(String),
    /// The solver did not reach the requested tolerance.
    #[error("solver did not converge: {0}")]
    Solver(String),
    /// One or more verification checks failed.
    #[error("verification failed: {0}")]
    Verification(String),
    /// An output file could not be written.
    #[error("cannot write {path}: {message}")]
    Output {
        /// Offending path.
        path: String,
        /// Underlying error.
        message: String,
    },
    /// Error raised by the numerical library.
    #[error(transparent)]
    Core(#[from] orthoscherk::Error),
}

impl CliError {
    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        use orthoscherk::Error as E;
        match self {
            CliError::Validation(_) | CliError::Output { .. } => EXIT_VALIDATION,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Core(e) => match e {
                E::Fit { .. } | E::Solver { .. } | E::Divergence(_) | E::SingularPath(_) | E::Degenerate(_) => EXIT_SOLVER,
                E::Contract(_) | E::PeriodClosure(_) | E::Assembly(_) => EXIT_VERIFICATION,
                _ => EXIT_VALIDATION,
            },
        }
    }
}
