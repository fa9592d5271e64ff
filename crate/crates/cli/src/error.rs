use std::fmt;

use pvsub::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    /// Malformed or out-of-range input.
    pub const INPUT: i32 = 2;
    /// The subdivision did not terminate within its depth or cube budget.
    pub const NON_TERMINATION: i32 = 3;
    /// The queried point is singular.
    pub const SINGULAR: i32 = 4;
}

/// An error paired with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: i32, error: impl Into<anyhow::Error>) -> Failure {
        Failure {
            code,
            error: error.into(),
        }
    }

    pub fn input(msg: impl fmt::Display) -> Failure {
        Failure::new(exit::INPUT, anyhow::anyhow!("{msg}"))
    }

    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Failure {
        Failure {
            code: self.code,
            error: self.error.context(msg),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub fn code_for(e: &Error) -> i32 {
    match e {
        Error::MaxDepthExceeded { .. } | Error::CubeBudgetExceeded { .. } => exit::NON_TERMINATION,
        _ => exit::INPUT,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(code_for(&e), e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(exit::FAILURE, e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(exit::FAILURE, e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::new(exit::FAILURE, e)
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
