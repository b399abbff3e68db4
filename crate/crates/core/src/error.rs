use std::path::PathBuf;

use thiserror::Error;

/// Failures while decoding a PGM stream.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgmError {
    #[error("bad magic number {0:?}: expected P2 or P5")]
    Magic(String),
    #[error("color PNM ({0}) is not supported; convert to grayscale first")]
    Color(String),
    #[error("malformed header field `{field}`: {reason}")]
    Header { field: &'static str, reason: String },
    #[error("maxval {0} exceeds 255")]
    MaxvalTooLarge(u32),
    #[error("pixel data truncated: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("sample {value} at index {index} exceeds maxval {maxval}")]
    SampleOutOfRange { index: usize, value: u32, maxval: u32 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height}")]
    Dimensions { width: usize, height: usize },
    #[error("pixel buffer length {len} does not match {width}x{height}")]
    BufferLength { width: usize, height: usize, len: usize },
    #[error("{path}: {source}")]
    Pgm {
        path: PathBuf,
        #[source]
        source: PgmError,
    },
    #[error(transparent)]
    Decode(#[from] PgmError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset {path}: {reason}")]
    Dataset { path: PathBuf, reason: String },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("size mismatch: {0}")]
    Mismatch(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("configuration: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
