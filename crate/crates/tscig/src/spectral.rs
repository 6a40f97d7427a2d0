//! Ground-truth edges from the inverse power spectral density of the
//! generating VAR models.
//!
//! For a stable VAR with identity noise covariance and transfer matrix
//! `A(f) = I - Σ_i A_i e^{-j2πfi}`, the spectrum is `S(f) = A⁻¹(f) A⁻ᴴ(f)`,
//! so the inverse spectrum is available without any matrix inversion:
//! `S⁻¹(f) = Aᴴ(f) A(f)`. The true edge set includes `{i,j}` when the
//! inverse-spectrum entry has nonnegligible mass summed over a frequency
//! grid.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::synthdata::VarModel;

/// Inclusive frequency grid in cycles/sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for FrequencyGrid {
    /// 51 points: 0, 0.01, ..., 0.5, endpoints included.
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 0.5,
            step: 0.01,
        }
    }
}

impl FrequencyGrid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step).round() as usize + 1;
        (0..count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

/// Default mass threshold for declaring a true edge.
pub const TRUE_EDGE_THRESHOLD: f64 = 1e-6;

/// Transfer matrix `A(f) = I - Σ_i A_i e^{-j2πfi}` of one community.
fn transfer_matrix(model: &VarModel, f: f64) -> DMatrix<Complex<f64>> {
    let k = model.dim();
    let mut a = DMatrix::from_diagonal_element(k, k, Complex::new(1.0, 0.0));
    for (i, coeff) in model.coeffs().iter().enumerate() {
        let phase = -2.0 * std::f64::consts::PI * f * (i + 1) as f64;
        let w = Complex::from_polar(1.0, phase);
        for r in 0..k {
            for c in 0..k {
                a[(r, c)] -= w * coeff[(r, c)];
            }
        }
    }
    a
}

/// Inverse spectrum `S⁻¹(f)` of the stacked process, block-diagonal by
/// community; per community it is `Aᴴ(f) A(f)`.
pub fn inverse_psd(models: &[VarModel], f: f64) -> Result<DMatrix<Complex<f64>>> {
    if models.is_empty() {
        return Err(Error::Config("need at least one model".into()));
    }
    let p: usize = models.iter().map(|m| m.dim()).sum();
    let mut out = DMatrix::zeros(p, p);
    let mut row0 = 0;
    for model in models {
        let a = transfer_matrix(model, f);
        let block = a.adjoint() * &a;
        let k = model.dim();
        out.view_mut((row0, row0), (k, k)).copy_from(&block);
        row0 += k;
    }
    Ok(out)
}

/// True edge set: `{i,j}` is an edge iff `Σ_f |[S⁻¹(f)]_ij| > threshold`
/// over the grid.
pub fn true_edge_set(
    models: &[VarModel],
    grid: &FrequencyGrid,
    threshold: f64,
) -> Result<EdgeSet> {
    if !(threshold > 0.0) {
        return Err(Error::Config(format!(
            "edge threshold must be > 0, got {threshold}"
        )));
    }
    let p: usize = models.iter().map(|m| m.dim()).sum();
    let mut mass: DMatrix<f64> = DMatrix::zeros(p, p);
    for f in grid.points() {
        let inv = inverse_psd(models, f)?;
        for i in 0..p {
            for j in (i + 1)..p {
                mass[(i, j)] += inv[(i, j)].norm();
            }
        }
    }
    let mut edges = EdgeSet::new(p);
    for i in 0..p {
        for j in (i + 1)..p {
            if mass[(i, j)] > threshold {
                edges.insert(i, j)?;
            }
        }
    }
    Ok(edges)
}

/// Per-frequency inverse-spectrum magnitude trace for one node pair.
pub fn inverse_psd_trace(
    models: &[VarModel],
    grid: &FrequencyGrid,
    i: usize,
    j: usize,
) -> Result<Vec<(f64, f64)>> {
    grid.points()
        .into_iter()
        .map(|f| Ok((f, inverse_psd(models, f)?[(i, j)].norm())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(coeffs: Vec<DMatrix<f64>>) -> VarModel {
        VarModel::new(coeffs).unwrap()
    }

    #[test]
    fn grid_has_51_inclusive_points() {
        let pts = FrequencyGrid::default().points();
        assert_eq!(pts.len(), 51);
        assert_eq!(pts[0], 0.0);
        assert_abs_diff_eq!(pts[50], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn white_noise_has_identity_inverse_spectrum() {
        let m = model(vec![DMatrix::zeros(3, 3)]);
        for f in FrequencyGrid::default().points() {
            let inv = inverse_psd(&[m.clone()], f).unwrap();
            for r in 0..3 {
                for c in 0..3 {
                    let expect = if r == c { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(inv[(r, c)].re, expect, epsilon = 1e-12);
                    assert_abs_diff_eq!(inv[(r, c)].im, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn scalar_ar1_at_zero_frequency() {
        let m = model(vec![DMatrix::from_element(1, 1, 0.5)]);
        let inv = inverse_psd(&[m.clone(), m], 0.0).unwrap();
        assert_abs_diff_eq!(inv[(0, 0)].re, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn coupled_var1_creates_edge() {
        // A1 = [[0.5, 0.2], [0, 0.5]] couples nodes 1 and 2.
        let a1 = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.0, 0.5]);
        let m = model(vec![a1]);
        // Symbolic expansion: [AᴴA]_{01} at f has A = I - A1 e^{-jθ},
        // entry (0,1) = conj(1 - 0.5 e^{-jθ}) * (-0.2 e^{-jθ}).
        let f = 0.13;
        let theta = -2.0 * std::f64::consts::PI * f;
        let w = Complex::from_polar(1.0, theta);
        let expect = (Complex::new(1.0, 0.0) - w * 0.5).conj() * (-(w * 0.2));
        let inv = inverse_psd(&[m.clone()], f).unwrap();
        assert_abs_diff_eq!(inv[(0, 1)].re, expect.re, epsilon = 1e-12);
        assert_abs_diff_eq!(inv[(0, 1)].im, expect.im, epsilon = 1e-12);
        assert!(expect.norm() > 1e-3);

        let edges = true_edge_set(&[m], &FrequencyGrid::default(), 1e-6).unwrap();
        assert!(edges.contains(0, 1));
        assert_eq!(edges.len(), 1);
    }

    #[test]
    fn diagonal_coefficients_give_empty_edge_set() {
        let a1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, -0.3]));
        let m = model(vec![a1]);
        let edges = true_edge_set(&[m], &FrequencyGrid::default(), 1e-6).unwrap();
        assert!(edges.is_empty());
    }

    #[test]
    fn inverse_spectrum_is_hermitian_and_block_diagonal() {
        let a = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, -0.2, 0.3]);
        let b = DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.5, -0.1]);
        let models = [model(vec![a]), model(vec![b])];
        for f in FrequencyGrid::default().points() {
            let inv = inverse_psd(&models, f).unwrap();
            let herm_err = (&inv - inv.adjoint()).norm();
            assert!(herm_err < 1e-12, "hermitian error {herm_err} at f={f}");
            for i in 0..2 {
                for j in 2..4 {
                    assert_eq!(inv[(i, j)], Complex::new(0.0, 0.0));
                }
            }
        }
    }
}
