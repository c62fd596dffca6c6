use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {0} has zero (or near-zero) norm and cannot be normalized")]
    ZeroRow(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("lambda must lie in [0, 1], got {0}")]
    InvalidLambda(f64),

    #[error("tau must be a positive finite real, got {0}")]
    InvalidTau(f64),

    #[error("input must be non-empty")]
    EmptyInput,

    #[error("cannot build an index over zero keys")]
    EmptyKeySet,

    #[error("requested top-{b} exceeds search queue width ef_search={ef_search}")]
    BeyondQueue { b: usize, ef_search: usize },

    #[error("no search results to analyze")]
    EmptyResults,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training batch is empty")]
    EmptyBatch,

    #[error("encoder produced a zero pre-normalization vector for {0}")]
    DegenerateEncoding(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("invariant violation: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
