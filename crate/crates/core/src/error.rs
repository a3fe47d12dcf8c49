use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{0}: corpus is empty")]
    EmptyCorpus(String),

    #[error("no corpus named `{0}`")]
    UnknownProject(String),

    #[error("vocabulary is empty (no document has a token in at least min_df documents)")]
    EmptyVocabulary,

    #[error("training data has a single class; both SATD and non-SATD examples are required")]
    DegenerateTraining,

    #[error("shape mismatch: expected {expected} {what}, got {actual}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("session is {0}; no further batches are served")]
    SessionClosed(&'static str),

    #[error("rejected labels: {0}")]
    RejectedLabels(String),

    #[error("unknown comment id {0}")]
    UnknownComment(usize),

    #[error("metric is undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("malformed session log line {line}: {reason}")]
    Log { line: usize, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
