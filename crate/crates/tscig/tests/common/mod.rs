//! Independent oracles used by the integration suites. Nothing here calls
//! into the solver's own update formulas: the KKT checker works from the
//! objective's first-order conditions, and the spectrum cross-check goes
//! through the autocovariance sequence and a numeric matrix inverse.

use nalgebra::{Complex, DMatrix};
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use tscig::evaluation::autocovariance_sequence;
use tscig::matrix::BlockSymMatrix;
use tscig::synthdata::VarModel;

fn soft(x: f64, kappa: f64) -> f64 {
    if x > kappa {
        x - kappa
    } else if x < -kappa {
        x + kappa
    } else {
        0.0
    }
}

/// Maximum violation of the subgradient optimality conditions of the
/// sparse-group penalized pseudo log-likelihood at (`omega`, pattern from
/// `w`). Zero (up to solver accuracy) at the true minimizer.
pub fn kkt_residual(
    omega: &BlockSymMatrix,
    w: &BlockSymMatrix,
    sigma: &BlockSymMatrix,
    lambda: f64,
    alpha: f64,
) -> f64 {
    let inv = omega
        .as_matrix()
        .clone()
        .try_inverse()
        .expect("omega must be invertible");
    let grad = sigma.as_matrix() - inv;
    let p = omega.num_blocks();
    let m = omega.block_size();
    let k1 = alpha * lambda;
    let k2 = (1.0 - alpha) * lambda;
    let mut worst = 0.0f64;

    for bi in 0..p {
        for bj in 0..p {
            let block_w = w.block(bi, bj).into_owned();
            let block_g = grad.view((bi * m, bj * m), (m, m)).into_owned();
            if bi == bj {
                for r in 0..m {
                    for s in 0..m {
                        let v = if r == s {
                            // Diagonal entries are unpenalized.
                            block_g[(r, s)].abs()
                        } else if block_w[(r, s)] != 0.0 {
                            (block_g[(r, s)] + k1 * block_w[(r, s)].signum()).abs()
                        } else {
                            (block_g[(r, s)].abs() - k1).max(0.0)
                        };
                        worst = worst.max(v);
                    }
                }
            } else if block_w.norm() == 0.0 {
                // Zero block: minimal-norm subgradient of the lasso part is
                // the soft-threshold of the gradient; its norm must fit
                // inside the group-penalty ball.
                let soft_norm = block_g.map(|g| soft(g, k1)).norm();
                worst = worst.max((soft_norm - k2).max(0.0));
            } else {
                let bn = block_w.norm();
                for r in 0..m {
                    for s in 0..m {
                        let v = if block_w[(r, s)] != 0.0 {
                            (block_g[(r, s)]
                                + k1 * block_w[(r, s)].signum()
                                + k2 * block_w[(r, s)] / bn)
                                .abs()
                        } else {
                            (block_g[(r, s)].abs() - k1).max(0.0)
                        };
                        worst = worst.max(v);
                    }
                }
            }
        }
    }
    worst
}

/// Random SPD population covariance with unit-scale diagonal.
pub fn random_spd(n: usize, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * 0.5
}

/// Sample covariance of `n_bar` zero-mean Gaussian draws from `pop_cov`.
pub fn gaussian_sample_covariance(
    pop_cov: &DMatrix<f64>,
    n_bar: usize,
    p: usize,
    m: usize,
    rng: &mut ChaCha20Rng,
) -> BlockSymMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let n = pop_cov.nrows();
    let chol = pop_cov.clone().cholesky().expect("population SPD").l();
    let mut acc = DMatrix::zeros(n, n);
    for _ in 0..n_bar {
        let z = nalgebra::DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let x = &chol * z;
        acc += &x * x.transpose();
    }
    acc /= n_bar as f64;
    BlockSymMatrix::symmetrized(acc, p, m).unwrap()
}

/// Brute-force inverse spectrum of a single community: Lyapunov
/// autocovariances, truncated Fourier sum, numeric complex inverse.
pub fn inverse_psd_brute_force(model: &VarModel, f: f64) -> DMatrix<Complex<f64>> {
    let k = model.dim();
    let max_lag = 2000usize;
    let r = autocovariance_sequence(model, max_lag).expect("stable model");
    let mut s: DMatrix<Complex<f64>> = DMatrix::zeros(k, k);
    for (tau, r_tau) in r.iter().enumerate() {
        let phase = -2.0 * std::f64::consts::PI * f * tau as f64;
        let w = Complex::from_polar(1.0, phase);
        for row in 0..k {
            for col in 0..k {
                if tau == 0 {
                    s[(row, col)] += w * r_tau[(row, col)];
                } else {
                    // R(-tau) = R(tau)^T contributes the conjugate phase.
                    s[(row, col)] += w * r_tau[(row, col)];
                    s[(row, col)] += w.conj() * r_tau[(col, row)];
                }
            }
        }
        if tau > 0 && r_tau.norm() < 1e-14 {
            break;
        }
    }
    s.try_inverse().expect("spectrum nonsingular")
}

/// Random stable VAR(1) community of size k, spectral radius scaled to 0.5.
pub fn random_var1(k: usize, rng: &mut ChaCha20Rng) -> VarModel {
    let a = DMatrix::from_fn(k, k, |_, _| rng.random::<f64>() - 0.5);
    let radius = a
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1e-6);
    VarModel::new(vec![a * (0.5 / radius)]).unwrap()
}
