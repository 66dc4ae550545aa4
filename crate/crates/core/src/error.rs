//! Crate-wide error type.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input data, reported with the 1-based row it came from.
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    /// A journal transaction that cannot be turned into a business process.
    #[error("transaction {tid}: {msg}")]
    Extraction { tid: u64, msg: String },

    /// An identifier that does not exist in the structure being queried.
    #[error("unknown {kind} {name:?}")]
    UnknownIdentifier { kind: &'static str, name: String },

    /// A structural precondition violated by otherwise well-formed input.
    #[error("{0}")]
    Invalid(String),

    /// Two values that must share a universe (objects or features) do not.
    #[error("mismatched {what}: {detail}")]
    Mismatch { what: &'static str, detail: String },

    /// Dempster combination with conflict 1: nothing left to normalize.
    #[error("total conflict: the combined masses share no common focal intersection")]
    TotalConflict,

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn unknown(kind: &'static str, name: impl Into<String>) -> Self {
        Error::UnknownIdentifier {
            kind,
            name: name.into(),
        }
    }
}
