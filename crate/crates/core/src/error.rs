use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs outside an operation's domain (unknown ids, bad exponents,
    /// empty windows, violated bound hypotheses).
    #[error("domain error: {0}")]
    Domain(String),

    /// The request is valid but exceeds a configured size limit.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Every requested scale was skipped.
    #[error("no usable scales: {0}")]
    NoUsableScales(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
