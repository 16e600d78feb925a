use thiserror::Error;

/// Errors produced by the estimation, inference and I/O layers.
#[derive(Debug, Error)]
pub enum OcteError {
    /// A variable was referenced that does not belong to the distribution or matrix.
    #[error("unknown variable {0}")]
    UnknownVariable(String),

    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A value is outside the domain its type allows.
    #[error("domain error: {0}")]
    Domain(String),

    /// A dense table or subset search would exceed the configured capacity.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Malformed input text. `location` names the row/column or line when known.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// A deserialized structure broke one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, OcteError>;

impl OcteError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        OcteError::Argument(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        OcteError::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
