use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

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
    #[error("cannot parse {value:?} as a number at row {row}, column {column:?}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("column {0:?} not found")]
    MissingColumn(String),
    #[error("dataset is empty")]
    Empty,
    #[error("column {0:?} has zero variance")]
    ZeroVariance(String),
    #[error("column {0:?} is constant in the fit data")]
    ConstantColumn(String),
    #[error("column {0:?} needs at least two distinct values")]
    DegenerateColumn(String),
    #[error("class {class:?} has {count} member(s); at least {needed} required")]
    ClassTooSmall {
        class: String,
        count: usize,
        needed: usize,
    },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid dataset: {0}")]
    InvalidData(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}
