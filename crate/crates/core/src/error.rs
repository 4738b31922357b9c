use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact computation or enumeration would exceed its configured size guard.
    #[error("{what}: size {size} exceeds guard {limit}")]
    GuardExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("element {0} is outside the sofic approximation's support")]
    OutOfSupport(String),

    #[error("action undefined on element {0}")]
    ActionUndefined(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("corrupted group model: {0}")]
    CorruptGroup(String),

    /// A verification needs exact counts but only bounds were available.
    #[error("count for {0} is not exact")]
    NotExact(String),

    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// An error raised while processing one named instance of an experiment.
    #[error("instance {id}: {source}")]
    Instance { id: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// The innermost error, looking through [`Error::Instance`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Instance { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn in_instance(self, id: &str) -> Self {
        Error::Instance {
            id: id.to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
