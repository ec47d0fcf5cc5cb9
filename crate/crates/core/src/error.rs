use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The input object is structurally unusable (degenerate, disconnected,
    /// malformed) rather than merely out of range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A size or work budget would be exceeded.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// An id lookup failed (unknown point, leaf, or node).
    #[error("lookup failed: {0}")]
    Lookup(String),

    /// Two objects that must describe the same space do not.
    #[error("mismatch: {0}")]
    Mismatch(String),

    /// An internal invariant the construction relies on failed. Reaching
    /// this indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
