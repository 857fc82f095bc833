use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dataset has no class labels")]
    MissingLabels,

    #[error("too few patterns: need at least {needed}, have {have}")]
    TooFewPatterns { needed: usize, have: usize },

    #[error("wilcoxon test needs at least {needed} non-zero differences, have {have}")]
    TooFewPairs { needed: usize, have: usize },

    #[error("non-finite objective value: {0}")]
    NonFinite(String),
}
