use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is out of range or inconsistent with the data.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The operation was called on data it is not defined for (for example the
    /// wrong noise model).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A size or budget guard refused the request.
    #[error("size guard: {0}")]
    SizeGuard(String),

    /// Malformed input file, with the 1-based line number of the offending record.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The LP engine ran past its pivot limit.
    #[error("simplex pivot limit ({0}) exceeded")]
    PivotLimit(usize),

    /// A solver returned something that must be impossible by construction.
    #[error("internal solver failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
