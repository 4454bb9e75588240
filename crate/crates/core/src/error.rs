use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid background: {0}")]
    InvalidBackground(String),

    #[error("background is empty: the oscillating part must not vanish identically")]
    EmptyBackground,

    #[error("derivative of order {order} is not supported by the {family} family (max {max})")]
    UnsupportedDerivative {
        family: &'static str,
        order: usize,
        max: usize,
    },

    #[error("no angular limit: {0}")]
    NoAngularLimit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("empty counting range: N_cl vanishes at E = {0}")]
    EmptyCountingRange(f64),

    #[error("not enough usable points for a fit: need {need}, got {got}")]
    InsufficientPoints { need: usize, got: usize },

    #[error("spectrum tail is not certified: {0}")]
    UncertifiedTail(String),

    #[error("Galerkin eigenvalues did not settle under cutoff doubling (max change {change:.3e}); increase cutoff")]
    IncreaseCutoff { change: f64 },

    #[error("scenario tag {tag} does not apply: {reason}")]
    BranchMismatch { tag: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
