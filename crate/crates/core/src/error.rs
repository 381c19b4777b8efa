use thiserror::Error;

/// Errors produced by the sector machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation. The message names
    /// the violated bound, e.g. `nu must be >= 0.5`.
    #[error("{0}")]
    Domain(String),

    /// A constructed object failed one of its build-time invariant checks.
    #[error("invariant `{name}` failed: {detail}")]
    Invariant { name: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
