use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lag order d={d}: must satisfy 0 <= d < n (n={n})")]
    InvalidLag { d: usize, n: usize },

    #[error("non-finite value in input data at row {row}, column {col}")]
    NonFiniteData { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric: max |A - A^T| entry = {max_asym:e}")]
    NotSymmetric { max_asym: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("negative threshold in proximal map: kappa1={kappa1}, kappa2={kappa2}")]
    NegativeThreshold { kappa1: f64, kappa2: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model generation failed: {0}")]
    Generation(String),

    #[error("unstable VAR model: companion spectral radius {radius} >= 1")]
    UnstableModel { radius: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
