//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The request is well-formed but exceeds what the exact algorithms support.
    #[error("capability exceeded: {0}")]
    CapabilityExceeded(String),
    /// A structural invariant that should have held was violated.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
