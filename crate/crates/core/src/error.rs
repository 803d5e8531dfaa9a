use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli label {label:?}: {reason}")]
    InvalidLabel { label: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },

    #[error("invalid time: {0}")]
    InvalidTime(String),

    #[error("infeasible decoherence times: T2 = {t2} us exceeds 2*T1 = {} us", 2.0 * t1)]
    InfeasibleTimes { t1: f64, t2: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("period {period} out of range (schedule has {count} periods)")]
    InvalidPeriod { period: usize, count: usize },

    #[error("series has zero variance")]
    DegenerateSeries,

    #[error("channel is not invertible: |f_{index}| = {value:.3e}")]
    NonInvertibleChannel { index: usize, value: f64 },

    #[error("histogram has no positive entries")]
    DegenerateHistogram,

    #[error("incomplete grid: {0}")]
    IncompleteGrid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, actual })
    }
}
