use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration or arguments.
    Usage,
    /// Input data missing, malformed or failing verification.
    Data,
    /// Numeric or model-level failure.
    Model,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("impossible observation under the model: {0}")]
    ImpossibleObservation(String),

    #[error("event has no topics")]
    EmptyTopics,

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("event timestamp {event} precedes the learner's last event at {last}")]
    OutOfOrder { event: f64, last: f64 },

    #[error("event {index}: {source}")]
    AtEvent {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("confusion matrix is empty")]
    EmptyConfusionMatrix,

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("parameter grid is empty")]
    EmptyGrid,

    #[error("missing column `{column}`; available headers: {available:?}")]
    MissingColumn {
        column: String,
        available: Vec<String>,
    },

    #[error("{rejected} of {total} rows rejected (limit is 1%)")]
    TooManyRejects { rejected: usize, total: usize },

    #[error("digest mismatch for {file}: expected {expected}, got {actual}")]
    DigestMismatch {
        file: String,
        expected: String,
        actual: String,
    },

    #[error("download of {url} failed after {attempts} attempts: {reason}")]
    Network {
        url: String,
        attempts: u32,
        reason: String,
    },

    #[error("nothing to visualise")]
    NothingToVisualise,

    #[error("line charts need a learner history")]
    MissingHistory,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid_parameter(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at_event(self, index: usize) -> Self {
        Error::AtEvent {
            index,
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter { .. }
            | Error::UnknownModel(_)
            | Error::EmptyGrid
            | Error::MissingHistory => ErrorClass::Usage,
            Error::ImpossibleObservation(_) | Error::EmptyConfusionMatrix => ErrorClass::Model,
            Error::AtEvent { source, .. } => source.class(),
            Error::EmptyTopics
            | Error::InvalidEvent(_)
            | Error::OutOfOrder { .. }
            | Error::MissingColumn { .. }
            | Error::TooManyRejects { .. }
            | Error::DigestMismatch { .. }
            | Error::Network { .. }
            | Error::NothingToVisualise
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_) => ErrorClass::Data,
        }
    }
}
