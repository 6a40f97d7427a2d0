//! Community-structured VAR benchmark generation.
//!
//! The benchmark data are stacked trajectories of independent per-community
//! VAR(q) models driven by i.i.d. standard Gaussian noise. Coefficients are
//! sparse uniform draws, rejection-resampled until the companion matrix is
//! comfortably stable.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embedding::TimeSeries;
use crate::error::{Error, Result};
use crate::rng::{self, tag};

/// Maximum coefficient re-draws before giving up on a stable model.
pub const REJECTION_BUDGET: usize = 10_000;

/// A single community's autoregressive model with identity noise covariance.
#[derive(Debug, Clone)]
pub struct VarModel {
    coeffs: Vec<DMatrix<f64>>,
    k: usize,
    /// Coefficient draws consumed by rejection sampling (1 = first accepted).
    pub draws: usize,
}

impl VarModel {
    pub fn new(coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Config("VAR order must be >= 1".into()));
        }
        let k = coeffs[0].nrows();
        for a in &coeffs {
            if a.nrows() != k || a.ncols() != k {
                return Err(Error::Dimension(
                    "all VAR coefficient matrices must be k x k".into(),
                ));
            }
        }
        Ok(Self { coeffs, k, draws: 1 })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Community size k.
    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    /// Companion matrix `[[A_1 .. A_q], [I, 0]]` of size `qk x qk`.
    pub fn companion(&self) -> DMatrix<f64> {
        let q = self.order();
        let k = self.k;
        let mut f = DMatrix::zeros(q * k, q * k);
        for (i, a) in self.coeffs.iter().enumerate() {
            f.view_mut((0, i * k), (k, k)).copy_from(a);
        }
        for i in 1..q {
            f.view_mut((i * k, (i - 1) * k), (k, k))
                .copy_from(&DMatrix::identity(k, k));
        }
        f
    }
}

/// Largest eigenvalue modulus of the companion matrix.
///
/// Uses a bounded QR (Schur) iteration; the unbounded variant can cycle
/// forever on some companion matrices. When the iteration does not
/// converge within the bound, falls back to Gelfand's formula
/// `lim ||F^K||^(1/K)`, evaluated by repeated squaring with
/// renormalization. The fallback overestimates the radius slightly
/// (Frobenius norm >= spectral radius), which only makes the stability
/// check more conservative.
pub fn companion_spectral_radius(model: &VarModel) -> Result<f64> {
    if model.coeffs.iter().all(|a| a.iter().all(|&v| v == 0.0)) {
        // Nilpotent companion; QR iteration would report spurious
        // eps^(1/q)-sized eigenvalues for the defective zero eigenvalue.
        return Ok(0.0);
    }
    let f = model.companion();
    let dim = f.nrows();
    if let Some(schur) = nalgebra::linalg::Schur::try_new(f.clone(), f64::EPSILON, 100 * dim.max(10)) {
        return Ok(schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max));
    }
    let norm0 = f.norm();
    if norm0 == 0.0 {
        return Ok(0.0);
    }
    let mut b = f / norm0;
    // log of the radius estimate ||F^(2^k)||^(1/2^k), accumulated in
    // normalized form to avoid overflow/underflow.
    let mut log_radius = norm0.ln();
    let mut inv_power = 1.0f64;
    for _ in 0..48 {
        b = &b * &b;
        inv_power *= 0.5;
        let norm = b.norm();
        if norm == 0.0 {
            // Numerically nilpotent: every eigenvalue is (near) zero.
            return Ok(0.0);
        }
        log_radius += inv_power * norm.ln();
        b /= norm;
    }
    Ok(log_radius.exp())
}

/// Parameters of the synthetic benchmark.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct BenchmarkSpec {
    pub num_communities: usize,
    pub community_size: usize,
    pub var_order: usize,
    /// Probability that a coefficient entry is nonzero.
    pub density: f64,
    pub coeff_min: f64,
    pub coeff_max: f64,
    /// Companion spectral radius cap for accepting a draw.
    pub stability_bound: f64,
    /// Leading simulated samples to discard.
    pub burn_in: usize,
    /// Sample count kept after burn-in.
    pub n: usize,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            num_communities: 16,
            community_size: 8,
            var_order: 3,
            density: 0.1,
            coeff_min: -0.8,
            coeff_max: 0.8,
            stability_bound: 0.95,
            burn_in: 100,
            n: 512,
            seed: 0,
        }
    }
}

impl BenchmarkSpec {
    /// Total node count p.
    pub fn num_nodes(&self) -> usize {
        self.num_communities * self.community_size
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_communities == 0 || self.community_size == 0 || self.var_order == 0 {
            return Err(Error::Config("community counts and order must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::Config(format!("density must be in [0,1], got {}", self.density)));
        }
        if !(self.coeff_min <= self.coeff_max) {
            return Err(Error::Config("coefficient range is empty".into()));
        }
        if !(self.stability_bound > 0.0 && self.stability_bound < 1.0) {
            return Err(Error::Config(format!(
                "stability bound must be in (0,1), got {}",
                self.stability_bound
            )));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be >= 1".into()));
        }
        Ok(())
    }
}

/// Draws one community's coefficients: each entry nonzero with probability
/// `density`, nonzero values uniform on the coefficient range; re-drawn until
/// the companion spectral radius is within the stability bound.
pub fn gen_var_model(spec: &BenchmarkSpec, rng: &mut ChaCha20Rng) -> Result<VarModel> {
    spec.validate()?;
    let k = spec.community_size;
    for draw in 1..=REJECTION_BUDGET {
        let coeffs: Vec<DMatrix<f64>> = (0..spec.var_order)
            .map(|_| {
                DMatrix::from_fn(k, k, |_, _| {
                    // Entry presence is drawn first so the value stream stays
                    // aligned regardless of sparsity pattern.
                    let present = rng.random::<f64>() < spec.density;
                    let value = rng.random_range(spec.coeff_min..=spec.coeff_max);
                    if present {
                        value
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        let mut model = VarModel::new(coeffs)?;
        if companion_spectral_radius(&model)? <= spec.stability_bound {
            model.draws = draw;
            return Ok(model);
        }
    }
    Err(Error::Generation(format!(
        "no stable model within {REJECTION_BUDGET} draws for k={k}, q={}, density={}, range=[{}, {}], bound={}",
        spec.var_order, spec.density, spec.coeff_min, spec.coeff_max, spec.stability_bound
    )))
}

/// Draws all community models, one independent stream per community, so
/// community q's model does not depend on `num_communities`.
pub fn gen_models(spec: &BenchmarkSpec) -> Result<Vec<VarModel>> {
    (0..spec.num_communities)
        .map(|q| {
            let mut rng = rng::stream(spec.seed, &[tag::MODEL, q as u64]);
            gen_var_model(spec, &mut rng)
        })
        .collect()
}

/// Simulates each community from zero initial state with i.i.d. standard
/// Gaussian noise, discards `burn_in` leading samples, and stacks the
/// communities into `p = Σ k_q` rows. One noise stream per community,
/// derived from `seed`.
pub fn simulate_var(
    models: &[VarModel],
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<TimeSeries> {
    if models.is_empty() || n == 0 {
        return Err(Error::Config("need at least one model and n >= 1".into()));
    }
    for model in models {
        let radius = companion_spectral_radius(model)?;
        if radius >= 1.0 {
            return Err(Error::UnstableModel { radius });
        }
    }
    let p: usize = models.iter().map(|m| m.dim()).sum();
    let mut values = DMatrix::zeros(p, n);
    let mut row0 = 0;
    for (q, model) in models.iter().enumerate() {
        let mut rng = rng::stream(seed, &[tag::NOISE, q as u64]);
        let k = model.dim();
        let order = model.order();
        let mut history: Vec<nalgebra::DVector<f64>> =
            vec![nalgebra::DVector::zeros(k); order];
        for t in 0..(burn_in + n) {
            let mut x = nalgebra::DVector::from_fn(k, |_, _| {
                StandardNormal.sample(&mut rng)
            });
            for (i, a) in model.coeffs().iter().enumerate() {
                x += a * &history[i];
            }
            history.rotate_right(1);
            history[0] = x.clone();
            if t >= burn_in {
                values.view_mut((row0, t - burn_in), (k, 1)).copy_from(&x);
            }
        }
        row0 += k;
    }
    TimeSeries::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_chacha::rand_core::SeedableRng;

    fn scalar_model(coeffs: &[f64]) -> VarModel {
        VarModel::new(
            coeffs
                .iter()
                .map(|&a| DMatrix::from_element(1, 1, a))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_model_radius_is_zero() {
        let model = VarModel::new(vec![DMatrix::zeros(3, 3); 2]).unwrap();
        assert_eq!(companion_spectral_radius(&model).unwrap(), 0.0);
    }

    #[test]
    fn scalar_var1_radius_is_coefficient() {
        let model = scalar_model(&[0.5]);
        assert_abs_diff_eq!(companion_spectral_radius(&model).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn scalar_var2_radius_from_quadratic_roots() {
        // z^2 - 0.5 z - 0.24 = 0 has roots 0.8 and -0.3.
        let model = scalar_model(&[0.5, 0.24]);
        assert_abs_diff_eq!(companion_spectral_radius(&model).unwrap(), 0.8, epsilon = 1e-10);
    }

    #[test]
    fn zero_density_accepts_first_draw() {
        let spec = BenchmarkSpec {
            density: 0.0,
            num_communities: 1,
            ..BenchmarkSpec::default()
        };
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let model = gen_var_model(&spec, &mut rng).unwrap();
        assert_eq!(model.draws, 1);
        assert_eq!(companion_spectral_radius(&model).unwrap(), 0.0);
        for a in model.coeffs() {
            assert_eq!(a.norm(), 0.0);
        }
    }

    #[test]
    fn default_spec_draw_is_stable_by_independent_route() {
        let spec = BenchmarkSpec {
            num_communities: 1,
            ..BenchmarkSpec::default()
        };
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let model = gen_var_model(&spec, &mut rng).unwrap();
        assert!(companion_spectral_radius(&model).unwrap() <= 0.95);
        // Independent check via Gelfand's formula: ||F^K||^(1/K) -> radius.
        let mut f = model.companion();
        let mut log_scale = 0.0f64;
        let mut power = 1usize;
        for _ in 0..9 {
            f = &f * &f;
            power *= 2;
            let norm = f.norm();
            log_scale = 2.0 * log_scale + norm.ln();
            f /= norm;
        }
        let radius_est = (log_scale / power as f64).exp();
        assert!(
            radius_est <= 0.96,
            "growth-rate radius estimate {radius_est} exceeds bound"
        );
    }

    #[test]
    fn dense_spec_rejects_but_terminates() {
        // density=1 on k=8, q=3 is wildly unstable; expect budget exhaustion
        // (or a very large draw count if a stable draw sneaks through).
        let spec = BenchmarkSpec {
            density: 1.0,
            num_communities: 1,
            ..BenchmarkSpec::default()
        };
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        match gen_var_model(&spec, &mut rng) {
            Err(Error::Generation(msg)) => assert!(msg.contains("density=1")),
            Ok(model) => assert!(model.draws > 1),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn zero_coefficients_give_iid_noise() {
        let model = VarModel::new(vec![DMatrix::zeros(4, 4)]).unwrap();
        let ts = simulate_var(&[model], 50_000, 10, 99).unwrap();
        let v = ts.values();
        let cov = (v * v.transpose()) / 50_000.0;
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!(
                    (cov[(r, c)] - expect).abs() < 0.03,
                    "cov[{r},{c}] = {}",
                    cov[(r, c)]
                );
            }
        }
    }

    #[test]
    fn scalar_ar1_autocorrelation() {
        // Need p >= 2 for TimeSeries, so pair the AR(1) with an independent one.
        let models = vec![scalar_model(&[0.5]), scalar_model(&[0.0])];
        let n = 100_000;
        let ts = simulate_var(&models, n, 200, 4).unwrap();
        let x = ts.values().row(0);
        let mut num = 0.0;
        let mut den = 0.0;
        for t in 1..n {
            num += x[t] * x[t - 1];
        }
        for t in 0..n {
            den += x[t] * x[t];
        }
        let rho1 = num / den;
        assert!((rho1 - 0.5).abs() < 0.01, "lag-1 autocorrelation {rho1}");
    }

    #[test]
    fn default_spec_shapes() {
        let spec = BenchmarkSpec {
            seed: 5,
            ..BenchmarkSpec::default()
        };
        let models = gen_models(&spec).unwrap();
        assert_eq!(models.len(), 16);
        let ts = simulate_var(&models, 512, spec.burn_in, spec.seed).unwrap();
        assert_eq!(ts.num_components(), 128);
        assert_eq!(ts.num_samples(), 512);
    }

    #[test]
    fn determinism_and_community_stream_invariance() {
        let spec = BenchmarkSpec {
            num_communities: 3,
            seed: 17,
            ..BenchmarkSpec::default()
        };
        let a = gen_models(&spec).unwrap();
        let b = gen_models(&spec).unwrap();
        for (ma, mb) in a.iter().zip(&b) {
            for (ca, cb) in ma.coeffs().iter().zip(mb.coeffs()) {
                assert_eq!(ca, cb);
            }
        }
        // Community q's model is unchanged when more communities are added.
        let wider = gen_models(&BenchmarkSpec {
            num_communities: 5,
            seed: 17,
            ..BenchmarkSpec::default()
        })
        .unwrap();
        for (ma, mw) in a.iter().zip(&wider) {
            assert_eq!(ma.coeffs(), mw.coeffs());
        }
        let ta = simulate_var(&a, 64, 100, 17).unwrap();
        let tb = simulate_var(&b, 64, 100, 17).unwrap();
        assert_eq!(ta.values(), tb.values());
    }

    #[test]
    fn refuses_unstable_model() {
        let model = scalar_model(&[1.1]);
        assert!(matches!(
            simulate_var(&[model, scalar_model(&[0.0])], 10, 0, 1),
            Err(Error::UnstableModel { .. })
        ));
    }

    #[test]
    fn cross_community_samples_are_uncorrelated() {
        let spec = BenchmarkSpec {
            num_communities: 2,
            community_size: 2,
            seed: 23,
            ..BenchmarkSpec::default()
        };
        let models = gen_models(&spec).unwrap();
        let n = 100_000;
        let ts = simulate_var(&models, n, 100, 23).unwrap();
        let v = ts.values();
        let bound = 5.0 / (n as f64).sqrt();
        for i in 0..2 {
            for j in 2..4 {
                let mut num = 0.0;
                let mut vi = 0.0;
                let mut vj = 0.0;
                for t in 0..n {
                    num += v[(i, t)] * v[(j, t)];
                    vi += v[(i, t)] * v[(i, t)];
                    vj += v[(j, t)] * v[(j, t)];
                }
                let corr = num / (vi.sqrt() * vj.sqrt());
                assert!(corr.abs() < bound, "cross corr ({i},{j}) = {corr}");
            }
        }
    }
}
