use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = StemError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum StemError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error at row {row}: {message}")]
    Parse { row: u64, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("malformed dataset: sample `{sample}`: {message}")]
    MalformedDataset { sample: String, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid sample `{sample}`: {message}")]
    InvalidSample { sample: String, message: String },

    #[error("invalid padding target {target}: sample `{sample}` already has length {len}")]
    InvalidTarget { sample: String, target: usize, len: usize },

    #[error("synthetic spec: {0}")]
    SynthSpec(String),

    #[error("sequence too short: need at least 2 points, got {0}")]
    TooShort(usize),

    #[error("invalid event code {code} for {dims} dimension(s)")]
    InvalidCode { code: u64, dims: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("duplicate feature {0}")]
    DuplicateFeature(String),

    #[error("incompatible vocabulary for sample `{sample}`: {message}")]
    IncompatibleVocabulary { sample: String, message: String },

    #[error("incompatible vectors: expected length {expected}, got {actual}")]
    IncompatibleVector { expected: usize, actual: usize },

    #[error("no model: training set is empty")]
    NoModel,

    #[error("unlabeled data: sample `{0}` has no label")]
    Unlabeled(String),

    #[error("degenerate task: {0}")]
    DegenerateTask(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl StemError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        StemError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for StemError {
    fn from(e: serde_json::Error) -> Self {
        StemError::Serde(e.to_string())
    }
}
