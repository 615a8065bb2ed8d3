use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid mode {0}; expected 1, 2 or 3")]
    InvalidMode(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("negative or non-finite entry {value} at position {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("invalid rank {0}; rank must be at least 1")]
    InvalidRank(usize),

    #[error("index {index} out of range for mode {mode} of size {size}")]
    IndexOutOfRange { mode: usize, index: usize, size: usize },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),

    #[error("label {label:?} has {available} documents but the schedule needs {needed}")]
    LabelShortage { label: String, needed: usize, available: usize },

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
