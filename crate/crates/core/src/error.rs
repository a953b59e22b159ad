use thiserror::Error;

/// Every failure the toolkit can report.
///
/// The variants follow the failure classes callers need to tell apart:
/// shape problems, violated preconditions, numerical breakdowns, control
/// designs that cannot work, bad configuration, and runtime divergence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("design error: {0}")]
    Design(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A scenario field failed validation; `path` is the dotted JSON path.
    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("simulation diverged at t = {t}: {reason}")]
    Diverged {
        t: f64,
        reason: String,
        last_state: Vec<f64>,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
