use thiserror::Error;

use crate::algebra::FieldContext;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field context mismatch: {0} vs {1}")]
    ContextMismatch(FieldContext, FieldContext),

    #[error("parse error: {0}")]
    Parse(String),

    /// An operation was called outside its domain. The message names the
    /// offending object (witness orbit, ball, parameter).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    /// An internal identity failed. Reaching this is a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
