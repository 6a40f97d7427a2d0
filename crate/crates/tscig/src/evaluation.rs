//! Theory-facing diagnostics: exact lag-augmented population covariance via
//! the companion-form discrete Lyapunov equation, and the entrywise
//! covariance-deviation statistic with its predicted rate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::BlockSymMatrix;
use crate::synthdata::{companion_spectral_radius, VarModel};

/// Entrywise deviation of a sample covariance from the population one.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DeviationReport {
    /// `max_{k,l} |[Σ̂ - Σ₀]_{kl}|`.
    pub max_abs_deviation: f64,
    pub n_bar: usize,
    pub m: usize,
    pub p: usize,
    /// `sqrt(ln(mp) / n̄)`, the scaling the statistic is expected to follow.
    pub predicted_rate: f64,
}

/// Solves `X = F X Fᵀ + Q` by Kronecker vectorization:
/// `(I - F⊗F) vec(X) = vec(Q)`. Dense LU; companion sizes here are small.
pub fn discrete_lyapunov(f: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = f.nrows();
    if f.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::Dimension("lyapunov: square matrices required".into()));
    }
    let n2 = n * n;
    let kron = f.kronecker(f);
    let system = DMatrix::identity(n2, n2) - kron;
    // vec() stacks columns; DMatrix iteration order is column-major already.
    let rhs = nalgebra::DVector::from_iterator(n2, q.iter().copied());
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Lyapunov system (unstable model?)".into()))?;
    Ok(DMatrix::from_iterator(n, n, sol.iter().copied()))
}

/// Autocovariance sequence `R(0), R(1), ..., R(max_lag)` of one community,
/// `R(τ) = E{x(t+τ) xᵀ(t)}`, from the companion-form stationary covariance
/// and the Yule-Walker recursion `R(τ) = Σ_i A_i R(τ-i)` for τ ≥ 1.
pub fn autocovariance_sequence(model: &VarModel, max_lag: usize) -> Result<Vec<DMatrix<f64>>> {
    let radius = companion_spectral_radius(model)?;
    if radius >= 1.0 {
        return Err(Error::UnstableModel { radius });
    }
    let k = model.dim();
    let q = model.order();
    let f = model.companion();
    let mut noise = DMatrix::zeros(q * k, q * k);
    noise.view_mut((0, 0), (k, k)).copy_from(&DMatrix::identity(k, k));
    let state_cov = discrete_lyapunov(&f, &noise)?;

    // Block row 0 of the state covariance holds R(0), R(1), ..., R(q-1):
    // state s(t) = [x(t); x(t-1); ...; x(t-q+1)].
    let mut r: Vec<DMatrix<f64>> = (0..q.min(max_lag + 1))
        .map(|tau| state_cov.view((0, tau * k), (k, k)).into_owned())
        .collect();
    for tau in r.len()..=max_lag {
        let mut next = DMatrix::zeros(k, k);
        for (i, a) in model.coeffs().iter().enumerate() {
            let lag = tau as isize - (i as isize + 1);
            let term = if lag >= 0 {
                r[lag as usize].clone()
            } else {
                r[(-lag) as usize].transpose()
            };
            next += a * term;
        }
        r.push(next);
    }
    r.truncate(max_lag + 1);
    Ok(r)
}

/// Population covariance of the lag-augmented vector `y(t)` for lag order
/// `d`, assembled per community from `R(τ)`, `|τ| ≤ d`; cross-community
/// blocks are zero.
pub fn true_lagged_covariance(models: &[VarModel], d: usize) -> Result<BlockSymMatrix> {
    let p: usize = models.iter().map(|m| m.dim()).sum();
    let m = d + 1;
    let mut out = DMatrix::zeros(m * p, m * p);
    let mut node0 = 0;
    for model in models {
        let k = model.dim();
        let r = autocovariance_sequence(model, d)?;
        for li in 0..k {
            for lj in 0..k {
                let (gi, gj) = (node0 + li, node0 + lj);
                for row_lag in 0..m {
                    for col_lag in 0..m {
                        // Entry (r,s) of block (i,j) is
                        // E{x_i(t - r) x_j(t - s)} = [R(s - r)]_{ij}.
                        let tau = col_lag as isize - row_lag as isize;
                        let val = if tau >= 0 {
                            r[tau as usize][(li, lj)]
                        } else {
                            r[(-tau) as usize][(lj, li)]
                        };
                        out[(gi * m + row_lag, gj * m + col_lag)] = val;
                    }
                }
            }
        }
        node0 += k;
    }
    BlockSymMatrix::symmetrized(out, p, m)
}

/// Entrywise max deviation plus the predicted rate for this instance size.
pub fn covariance_deviation(
    sigma_hat: &BlockSymMatrix,
    sigma_true: &BlockSymMatrix,
    n_bar: usize,
) -> Result<DeviationReport> {
    if sigma_hat.dim() != sigma_true.dim()
        || sigma_hat.num_blocks() != sigma_true.num_blocks()
    {
        return Err(Error::Dimension(
            "covariance_deviation: shape mismatch".into(),
        ));
    }
    let max_abs_deviation = sigma_hat
        .as_matrix()
        .iter()
        .zip(sigma_true.as_matrix().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let m = sigma_hat.block_size();
    let p = sigma_hat.num_blocks();
    let predicted_rate = (((m * p) as f64).ln() / n_bar as f64).sqrt();
    Ok(DeviationReport {
        max_abs_deviation,
        n_bar,
        m,
        p,
        predicted_rate,
    })
}
