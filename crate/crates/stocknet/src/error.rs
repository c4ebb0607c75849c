//! Error types shared across the crate.

use thiserror::Error;

/// Top-level error for all library operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Configuration or precondition violations (bad parameters, kind
    /// mismatches, bin-count bounds and similar).
    #[error("validation: {0}")]
    Validation(String),

    /// Problems with input data: unreadable or malformed files, panels
    /// violating their invariants, unknown tickers.
    #[error("data: {0}")]
    Data(String),

    /// Numerical failures such as non-convergence of an iteration.
    #[error("numeric: {0}")]
    Numeric(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Process exit code used by the command line interface: 2 for
    /// validation errors, 3 for data errors, 4 for numeric errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 2,
            Error::Data(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 3,
            Error::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
