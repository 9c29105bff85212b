use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid hyperedge: {0}")]
    InvalidHyperedge(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cannot sample negative hyperedges of size {size}: {reason}")]
    NegativeSpaceExhausted { size: usize, reason: String },

    #[error("layer {0} has no observed hyperedges")]
    EmptyLayer(usize),

    #[error("zero rate on observed interaction ({0})")]
    ZeroRate(String),

    #[error("non-finite update for {0}")]
    NonFiniteUpdate(String),

    #[error("no sub-hyperedges inside the queried hyperedge")]
    NoSubHyperedges,

    #[error("fitting failed: every restart degenerated (last error: {0})")]
    FitFailed(String),

    #[error("manifest error: {0}")]
    Manifest(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
