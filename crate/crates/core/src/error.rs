use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("k = {k} must satisfy 1 <= k <= N - 1 (N = {n})")]
    InvalidK { k: usize, n: usize },

    #[error("sample index {index} out of range (N = {n})")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("non-finite value in sample {row}")]
    NonFinite { row: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("k-th neighbour distance is zero at sample {index} (duplicate points); the estimator needs continuous data")]
    ZeroRadius { index: usize },

    #[error("empty {subspace} neighbourhood at sample {index}")]
    ZeroCount {
        index: usize,
        subspace: &'static str,
    },

    #[error("kernel density underflowed to zero at query {index}")]
    KdeUnderflow { index: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("degenerate bounds in dimension {dim}: [{lo}, {hi}]")]
    DegenerateBounds { dim: usize, lo: f64, hi: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
