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

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("no columns selected")]
    NoColumns,

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("no rows survived ingestion ({dropped} dropped)")]
    NoRows { dropped: usize },

    #[error("dimension {dim} out of range for {n_dims}-dimensional data")]
    DimOutOfRange { dim: usize, n_dims: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate bucket width on the {0} axis (all values equal)")]
    ZeroWidth(&'static str),

    #[error("no bucket exceeds the density threshold {threshold}")]
    EmptyTrainingSet { threshold: u64 },

    #[error("degenerate regression: all x values are equal")]
    DegenerateFit,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("all {trials} trials were censored at walk length {n}")]
    AllCensored { trials: usize, n: usize },

    #[error("invalid snapshot: {0}")]
    Snapshot(String),

    #[error("{index}: {mismatched} of {total} queries disagree with full scan")]
    Correctness {
        index: String,
        mismatched: usize,
        total: usize,
        samples: Vec<crate::bench::Mismatch>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
