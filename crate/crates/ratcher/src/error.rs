use thiserror::Error;

/// Failures reported by the engine. The variants line up with the CLI exit codes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Bad user input: unknown type, non-regular denominator, malformed slope.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// The request is well formed but exceeds the configured computation budget.
    #[error("infeasible under budget: {0}")]
    Infeasible(String),
    /// An internal consistency check failed; this indicates a bug.
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) => 2,
            Error::Infeasible(_) => 3,
            Error::Invariant(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

pub(crate) fn invariant<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invariant(msg.into()))
}
