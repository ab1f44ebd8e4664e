use thiserror::Error;

/// Errors produced by matrix ingestion, matching construction, and the
/// test engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("matrix too small: need even n >= 4, got n = {0}")]
    TooSmall(usize),

    #[error("asymmetric input at ({i}, {j}): {a} vs {b} (strict symmetry policy)")]
    AsymmetricInput { i: usize, j: usize, a: f64, b: f64 },

    #[error("enumeration too large: n = {n} exceeds cutoff {cutoff}")]
    EnumerationTooLarge { n: usize, cutoff: usize },

    #[error("invalid pair: indices must be distinct and in range, got ({i}, {j})")]
    InvalidPair { i: usize, j: usize },

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("degenerate permutation distribution: variance is zero")]
    DegenerateDistribution,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
