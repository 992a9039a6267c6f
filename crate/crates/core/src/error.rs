use thiserror::Error;

/// Errors raised by the bounds, alignment and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("channel realization has {available} time slots, {needed} required")]
    SlotsExhausted { needed: usize, available: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("extension length {mu} exceeds the cap of {cap}")]
    MuCapExceeded { mu: String, cap: u64 },

    #[error("ill-conditioned system ({context}): condition number {cond:.3e} exceeds {limit:.1e}")]
    IllConditioned {
        context: String,
        cond: f64,
        limit: f64,
    },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("scheme not applicable: {0}")]
    NotApplicable(String),

    #[error("receiver {receiver} cannot separate its desired streams from interference")]
    NotSeparable { receiver: usize },

    #[error("invalid SNR grid: {0}")]
    InvalidGrid(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
