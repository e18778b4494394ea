use thiserror::Error;

/// Errors raised by the library when a caller breaks an operation's contract
/// or when input data cannot be read.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown problem id {0}")]
    UnknownProblem(u32),

    #[error(
        "problem {0} is not fully specified; enable it explicitly to use the documented substitute"
    )]
    ExplicitlyUnspecified(u32),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
