use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lexicon is empty")]
    EmptyLexicon,

    #[error("lexicon term {term:?} appears in both {first} and {second}")]
    LexiconOverlap {
        term: String,
        first: &'static str,
        second: &'static str,
    },

    #[error("no records to aggregate")]
    EmptyInput,

    #[error("training data contains a single class; both Positive and Negative are required")]
    SingleClass,

    #[error("vocabulary is empty after pruning with min_freq={min_freq}")]
    EmptyVocabulary { min_freq: usize },

    #[error("vector index {index} out of range for vocabulary of size {vocab_size}")]
    DimensionMismatch { index: usize, vocab_size: usize },

    #[error("requested {requested} messages but only {available} are available")]
    InsufficientMessages { requested: usize, available: usize },

    #[error("class {class} has {count} members, fewer than k={k}")]
    ClassTooSmall {
        class: &'static str,
        count: usize,
        k: usize,
    },

    #[error("message id sets differ: only in first {only_first:?}, only in second {only_second:?}")]
    MismatchedIds {
        only_first: Vec<String>,
        only_second: Vec<String>,
    },

    #[error("annotation session for task {task_id} by {annotator} is already complete")]
    SessionComplete { task_id: String, annotator: String },

    #[error("unknown message id {0}")]
    UnknownMessage(String),

    #[error("malformed model file: {0}")]
    Model(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for usage or input problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Csv { .. }
            | Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::EmptyLexicon
            | Error::LexiconOverlap { .. }
            | Error::InsufficientMessages { .. }
            | Error::MismatchedIds { .. }
            | Error::SessionComplete { .. }
            | Error::UnknownMessage(_)
            | Error::Model(_) => 2,
            _ => 1,
        }
    }
}
