use thiserror::Error;

/// Every failure the library reports. The CLI maps variants to exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { msg: String, line: usize, column: usize },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("size cap exceeded: {0}")]
    Cap(String),
    #[error("infeasible or budget exhausted: {0}")]
    Infeasible(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { msg: e.to_string(), line: e.line(), column: e.column() }
    }
}
