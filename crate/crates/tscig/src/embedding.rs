//! Lag-augmented embedding of a multivariate time series.
//!
//! Each node `i` carries the vector `z_i(t) = [x_i(t), x_i(t-1), ..., x_i(t-d)]`
//! and the embedded sample is the stack `y(t) = [z_1(t); ...; z_p(t)]` of
//! dimension `(d+1)*p`. Layout is node-major, lag-minor: row `i*(d+1) + r`
//! of `y(t)` holds `x_i(t - r)`. A lag-major layout would break the `m x m`
//! block extraction of the precision matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::BlockSymMatrix;

/// A `p x n` observation matrix; row `i` is the scalar component series `x_i(t)`.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    values: DMatrix<f64>,
}

impl TimeSeries {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::Dimension(format!(
                "need p >= 2 component series, got {}",
                values.nrows()
            )));
        }
        if values.ncols() < 1 {
            return Err(Error::Dimension("need n >= 1 samples".into()));
        }
        for c in 0..values.ncols() {
            for r in 0..values.nrows() {
                if !values[(r, c)].is_finite() {
                    return Err(Error::NonFiniteData { row: r, col: c });
                }
            }
        }
        Ok(Self { values })
    }

    /// Node count p.
    pub fn num_components(&self) -> usize {
        self.values.nrows()
    }

    /// Sample count n.
    pub fn num_samples(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Subtracts the empirical mean of each component series.
    ///
    /// Off by default everywhere; the generating process is zero-mean.
    pub fn demeaned(&self) -> Self {
        let mut v = self.values.clone();
        for r in 0..v.nrows() {
            let mean = v.row(r).sum() / v.ncols() as f64;
            for c in 0..v.ncols() {
                v[(r, c)] -= mean;
            }
        }
        Self { values: v }
    }
}

/// Columns of lag-augmented samples `y(t)`, `t = d .. n-1`.
#[derive(Debug, Clone)]
pub struct LaggedSampleSet {
    samples: DMatrix<f64>,
    p: usize,
    d: usize,
}

impl LaggedSampleSet {
    /// Node count p.
    pub fn num_components(&self) -> usize {
        self.p
    }

    /// Lag order d; block size is m = d + 1.
    pub fn lag_order(&self) -> usize {
        self.d
    }

    /// Effective sample count n̄ = n - d.
    pub fn num_samples(&self) -> usize {
        self.samples.ncols()
    }

    /// Embedded dimension (d+1)*p.
    pub fn dim(&self) -> usize {
        self.samples.nrows()
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }
}

/// Builds the lag-augmented sample set for lag order `d`.
///
/// Column `t` (for `t = d .. n-1` of the original series) stacks, node-major,
/// the current value and `d` delayed copies of every component.
pub fn build_lagged_embedding(x: &TimeSeries, d: usize) -> Result<LaggedSampleSet> {
    let p = x.num_components();
    let n = x.num_samples();
    if d >= n {
        return Err(Error::InvalidLag { d, n });
    }
    let m = d + 1;
    let n_bar = n - d;
    let v = x.values();
    let mut samples = DMatrix::zeros(m * p, n_bar);
    for (col, t) in (d..n).enumerate() {
        for i in 0..p {
            for r in 0..m {
                samples[(i * m + r, col)] = v[(i, t - r)];
            }
        }
    }
    Ok(LaggedSampleSet { samples, p, d })
}

/// Sample covariance `(1/n̄) Σ_t y(t) y(t)^T`, no mean subtraction.
pub fn sample_covariance(y: &LaggedSampleSet) -> Result<BlockSymMatrix> {
    let n_bar = y.num_samples() as f64;
    let s = y.samples();
    let mut cov = s * s.transpose();
    cov /= n_bar;
    BlockSymMatrix::symmetrized(cov, y.num_components(), y.lag_order() + 1)
}
