use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the reconstruction pipeline and its I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("rank-deficient system: {rows} equations, {cols} unknowns, condition number {condition:.3e}")]
    RankDeficient {
        rows: usize,
        cols: usize,
        condition: f64,
    },

    #[error("config {path}: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit status used by the command-line tool for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::LengthMismatch { .. } => 2,
            Error::RankDeficient { .. } => 3,
            Error::Config { .. } => 4,
            Error::Io { .. } => 5,
            Error::Format { .. } => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
