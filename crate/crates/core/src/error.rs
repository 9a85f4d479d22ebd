use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by graph construction, spectral analysis, sampling and recovery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    #[error("graph is disconnected: eigenvalue 0 has multiplicity {multiplicity}")]
    Disconnected { multiplicity: usize },

    #[error("filter domain error: {0}")]
    FilterDomain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("enumeration budget exceeded: {needed} supports required, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
