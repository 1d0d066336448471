//! Library side of the `muskat` command-line tool: the run driver and the
//! verification suites, shared with the acceptance tests.

pub mod driver;
pub mod verify;

/// Exit code for success or a passing verification.
pub const EXIT_OK: i32 = 0;
/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for numerical failure (blow-up) or a failing verification.
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] muskat_io::IoError),
    #[error(transparent)]
    Core(#[from] muskat_core::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    /// Bad input is a usage error; anything the numerics reject is a failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Output(_) => EXIT_USAGE,
            CliError::Core(_) => EXIT_FAIL,
        }
    }
}
