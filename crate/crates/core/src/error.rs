use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure classes surfaced by loaders, planners and writers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("decode failure in {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("unsupported format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("zero-dimension image")]
    ZeroDimension,

    #[error("dimension mismatch for {what}: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        what: &'static str,
        expected_w: u32,
        expected_h: u32,
        got_w: u32,
        got_h: u32,
    },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("unknown prediction id {0}")]
    UnknownPredictionId(u32),

    #[error("duplicate metadata id {0}")]
    DuplicateMetadataId(u32),

    #[error("invalid metadata for id {id}: {reason}")]
    InvalidMetadata { id: u32, reason: String },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("encode failure for {path}: {reason}")]
    Encode { path: PathBuf, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for failures writing artifacts (as opposed to bad inputs).
    pub fn is_output(&self) -> bool {
        matches!(self, Error::Write { .. } | Error::Encode { .. })
    }

    pub(crate) fn read(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Read {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Write {
            path: path.into(),
            source,
        }
    }
}
