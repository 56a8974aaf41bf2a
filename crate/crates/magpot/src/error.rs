use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("trial function has zero norm (A = {0:e})")]
    ZeroNorm(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate reference row {0}")]
    Duplicate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
