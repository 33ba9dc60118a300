use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("ambient dimension must be positive")]
    ZeroDimension,

    #[error("invalid bit string {0:?}")]
    ParseBitVec(String),

    #[error("zero vector at input index {index}; the partition requires nonzero vectors")]
    ZeroVector { index: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("threshold order violated: T_min = {t_min} is not below T_max = {t_max}")]
    ThresholdOrder { t_min: f64, t_max: f64 },

    #[error("T_max = {t_max} is not below m/d^2 = {limit}; the heavy set may be empty (sample too small for these parameters)")]
    ThresholdTooLarge { t_max: f64, limit: f64 },

    #[error("sample count mismatch: parameters were built for m = {expected}, got {found} vectors")]
    SampleCountMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("sample source exhausted: requested {requested}, {available} available")]
    DataExhausted { requested: usize, available: usize },

    #[error("dataset {path}:{line}: {message}")]
    Dataset {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid seed {0:?}: expected a decimal u64 or 64 hex digits")]
    Seed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Rejects values outside the open interval `(lo, hi)`.
pub(crate) fn check_open(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && value > lo && value < hi {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "outside the admissible open interval",
        })
    }
}
