//! Monte Carlo experiment driver: replicate generation, per-cell estimation,
//! hyperparameter search, aggregation, and result persistence.
//!
//! A cell is one (method, n, replicate) combination, where the method is the
//! lag order (`lag0` is the i.i.d. baseline run with the plain sample
//! covariance and lasso-only penalty). Every cell derives its own RNG
//! streams, so results are independent of which other cells run.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::embedding::{build_lagged_embedding, sample_covariance};
use crate::error::{Error, Result};
use crate::graph::{infer_edges, score, EdgeSet, MetricsRecord, W_EDGE_TOL};
use crate::matrix::BlockSymMatrix;
use crate::rng::derive_seed;
use crate::solver::{admm_solve, objective, AdmmConfig, PenaltyConfig, SolveResult};
use crate::spectral::{true_edge_set, FrequencyGrid, TRUE_EDGE_THRESHOLD};
use crate::synthdata::{gen_models, simulate_var, BenchmarkSpec};

const REP_TAG: u64 = 100;
const DATA_TAG: u64 = 101;

/// How (λ, α) is chosen per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningMode {
    /// Grid argmax of F1 against the true edge set (benchmark protocol).
    OracleF1,
    /// Grid argmin of `n̄ (tr(Σ̂Ω̂) - ln|Ω̂|) + ln(n̄) · nnz(W upper triangle)`.
    Bic,
}

/// Full experiment configuration; readable from a TOML file.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkSpec,
    /// Lag orders d to run; d=0 is the i.i.d. baseline.
    pub lags: Vec<usize>,
    pub sample_sizes: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub replicates: usize,
    pub tuning_mode: TuningMode,
    pub solver: AdmmConfig,
    pub output_dir: PathBuf,
    /// Subtract the empirical mean of each component before embedding.
    pub demean: bool,
    /// Block-norm tolerance when reading edges off W.
    pub edge_tol: f64,
    /// Worker threads; 0 means the rayon default.
    pub workers: usize,
    /// Also dump true/estimated edge sets per cell.
    pub save_edges: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            benchmark: BenchmarkSpec::default(),
            lags: vec![0, 1, 3],
            sample_sizes: vec![128, 256, 512, 1024, 2048],
            lambda_grid: log_space(1e-3, 1.0, 20),
            alpha_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            replicates: 100,
            tuning_mode: TuningMode::OracleF1,
            solver: AdmmConfig::default(),
            output_dir: PathBuf::from("results"),
            demean: false,
            edge_tol: W_EDGE_TOL,
            workers: 0,
            save_edges: false,
        }
    }
}

/// Logarithmically spaced grid, endpoints included.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (llo + (lhi - llo) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: Self =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.benchmark.validate()?;
        self.solver.validate()?;
        if self.lags.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::Config("lags and sample_sizes must be nonempty".into()));
        }
        if self.lambda_grid.is_empty() || self.alpha_grid.is_empty() {
            return Err(Error::Config("lambda and alpha grids must be nonempty".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        for &l in &self.lambda_grid {
            if !(l >= 0.0) {
                return Err(Error::Config(format!("lambda grid value {l} < 0")));
            }
        }
        for &a in &self.alpha_grid {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Config(format!("alpha grid value {a} not in [0,1]")));
            }
        }
        Ok(())
    }
}

/// Chosen grid point and its solve.
#[derive(Debug)]
pub struct TuneOutcome {
    pub lambda: f64,
    pub alpha: f64,
    pub result: SolveResult,
    pub solve_ms: f64,
}

/// Exhaustive grid search over (λ, α).
///
/// Grid sweep order is λ ascending, α descending, with strict improvement
/// required, so ties resolve to the smaller λ and then the larger α.
pub fn tune(
    sigma: &BlockSymMatrix,
    n_bar: usize,
    lambda_grid: &[f64],
    alpha_grid: &[f64],
    truth: Option<&EdgeSet>,
    mode: TuningMode,
    solver: &AdmmConfig,
    edge_tol: f64,
) -> Result<TuneOutcome> {
    if lambda_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::Config("empty tuning grid".into()));
    }
    if mode == TuningMode::OracleF1 && truth.is_none() {
        return Err(Error::Config("oracle_f1 tuning requires the true edge set".into()));
    }
    let mut lambdas = lambda_grid.to_vec();
    lambdas.sort_by(|a, b| a.total_cmp(b));
    let mut alphas = alpha_grid.to_vec();
    alphas.sort_by(|a, b| b.total_cmp(a));

    let mut best: Option<(f64, TuneOutcome)> = None;
    for &lambda in &lambdas {
        for &alpha in &alphas {
            let penalty = PenaltyConfig::new(lambda, alpha)?;
            let t0 = Instant::now();
            let result = admm_solve(sigma, &penalty, solver)?;
            let solve_ms = t0.elapsed().as_secs_f64() * 1e3;
            // Higher is better in both modes; BIC is negated.
            let merit = match mode {
                TuningMode::OracleF1 => {
                    let est = infer_edges(&result.w, edge_tol);
                    score(&est, truth.expect("checked above"))?.f1
                }
                TuningMode::Bic => {
                    let fit = objective(
                        &result.omega,
                        sigma,
                        &PenaltyConfig::new(0.0, 1.0)?,
                    )?;
                    let df = nnz_upper(&result.w);
                    -(n_bar as f64 * fit + (n_bar as f64).ln() * df as f64)
                }
            };
            if best.as_ref().map_or(true, |(b, _)| merit > *b) {
                best = Some((
                    merit,
                    TuneOutcome {
                        lambda,
                        alpha,
                        result,
                        solve_ms,
                    },
                ));
            }
        }
    }
    Ok(best.expect("nonempty grid").1)
}

/// Nonzero entries of the upper triangle (diagonal included).
fn nnz_upper(w: &BlockSymMatrix) -> usize {
    let n = w.dim();
    let mut count = 0;
    for k in 0..n {
        for l in k..n {
            if w.as_matrix()[(k, l)] != 0.0 {
                count += 1;
            }
        }
    }
    count
}

/// Per-(method, n) aggregate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Aggregate {
    pub method: String,
    pub n: usize,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub mean_runtime_ms: f64,
    pub failed_cells: usize,
}

/// All rows plus recomputable aggregates.
#[derive(Debug, serde::Serialize)]
pub struct ResultTable {
    pub rows: Vec<MetricsRecord>,
    pub aggregates: Vec<Aggregate>,
    pub failed_cells: usize,
}

pub fn method_label(d: usize) -> String {
    if d == 0 {
        "iid".to_string()
    } else {
        format!("lag{d}")
    }
}

struct Cell {
    replicate: usize,
    n: usize,
    d: usize,
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<MetricsRecord> {
    let master = cfg.benchmark.seed;
    let mut spec = cfg.benchmark.clone();
    spec.seed = derive_seed(master, &[REP_TAG, cell.replicate as u64]);
    spec.n = cell.n;
    let models = gen_models(&spec)?;
    let truth = true_edge_set(&models, &FrequencyGrid::default(), TRUE_EDGE_THRESHOLD)?;
    let data_seed = derive_seed(master, &[DATA_TAG, cell.replicate as u64, cell.n as u64]);
    let ts = simulate_var(&models, cell.n, spec.burn_in, data_seed)?;
    let ts = if cfg.demean { ts.demeaned() } else { ts };

    let t0 = Instant::now();
    let embedded = build_lagged_embedding(&ts, cell.d)?;
    let sigma = sample_covariance(&embedded)?;
    let embed_ms = t0.elapsed().as_secs_f64() * 1e3;

    // The i.i.d. baseline (d=0) sees 1x1 blocks where the group and lasso
    // penalties coincide; run it lasso-only.
    let alpha_grid: Vec<f64> = if cell.d == 0 {
        vec![1.0]
    } else {
        cfg.alpha_grid.clone()
    };
    let outcome = tune(
        &sigma,
        embedded.num_samples(),
        &cfg.lambda_grid,
        &alpha_grid,
        Some(&truth),
        cfg.tuning_mode,
        &cfg.solver,
        cfg.edge_tol,
    )?;
    let est = infer_edges(&outcome.result.w, cfg.edge_tol);
    let mut record = score(&est, &truth)?;
    record.method = method_label(cell.d);
    record.n = cell.n;
    record.d = cell.d;
    record.lambda = outcome.lambda;
    record.alpha = outcome.alpha;
    record.replicate = cell.replicate;
    record.runtime_ms = embed_ms + outcome.solve_ms;
    record.converged = outcome.result.converged;
    record.iterations = outcome.result.iterations;

    if cfg.save_edges {
        let dir = &cfg.output_dir;
        crate::io::write_edge_set(
            &dir.join(format!("edges_true_rep{}.csv", cell.replicate)),
            &truth,
        )?;
        crate::io::write_edge_set(
            &dir.join(format!(
                "edges_{}_n{}_rep{}.csv",
                record.method, cell.n, cell.replicate
            )),
            &est,
        )?;
    }
    Ok(record)
}

fn failed_record(cfg_d: usize, n: usize, replicate: usize) -> MetricsRecord {
    MetricsRecord {
        method: method_label(cfg_d),
        n,
        d: cfg_d,
        lambda: f64::NAN,
        alpha: f64::NAN,
        replicate,
        precision: f64::NAN,
        recall: f64::NAN,
        f1: f64::NAN,
        runtime_ms: 0.0,
        converged: false,
        iterations: 0,
    }
}

/// Runs the full Monte Carlo grid. Failed cells are flagged with NaN metrics
/// and counted; the run continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;

    let mut cells = Vec::new();
    for replicate in 0..cfg.replicates {
        for &n in &cfg.sample_sizes {
            for &d in &cfg.lags {
                cells.push(Cell { replicate, n, d });
            }
        }
    }

    let run_all = || -> Vec<(MetricsRecord, bool)> {
        cells
            .par_iter()
            .map(|cell| match run_cell(cfg, cell) {
                Ok(rec) => (rec, false),
                Err(e) => {
                    eprintln!(
                        "cell d={} n={} rep={} failed: {e}",
                        cell.d, cell.n, cell.replicate
                    );
                    (failed_record(cell.d, cell.n, cell.replicate), true)
                }
            })
            .collect()
    };
    let outcomes = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(run_all)
    } else {
        run_all()
    };

    let failed_cells = outcomes.iter().filter(|(_, failed)| *failed).count();
    let mut rows: Vec<MetricsRecord> = outcomes.into_iter().map(|(r, _)| r).collect();
    rows.sort_by(|a, b| {
        (a.d, a.n, a.replicate).cmp(&(b.d, b.n, b.replicate))
    });

    let aggregates = aggregate(&rows);
    let table = ResultTable {
        rows,
        aggregates,
        failed_cells,
    };
    write_results_csv(&cfg.output_dir.join("results.csv"), &table.rows)?;
    write_summary_json(&cfg.output_dir.join("summary.json"), cfg, &table)?;
    Ok(table)
}

fn aggregate(rows: &[MetricsRecord]) -> Vec<Aggregate> {
    let mut keys: Vec<(usize, usize)> = rows.iter().map(|r| (r.d, r.n)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.iter()
        .map(|&(d, n)| {
            let group: Vec<&MetricsRecord> = rows
                .iter()
                .filter(|r| r.d == d && r.n == n && r.f1.is_finite())
                .collect();
            let failed = rows
                .iter()
                .filter(|r| r.d == d && r.n == n && !r.f1.is_finite())
                .count();
            let count = group.len().max(1) as f64;
            let mean_f1 = group.iter().map(|r| r.f1).sum::<f64>() / count;
            let var = group
                .iter()
                .map(|r| (r.f1 - mean_f1).powi(2))
                .sum::<f64>()
                / count;
            let mean_rt = group.iter().map(|r| r.runtime_ms).sum::<f64>() / count;
            Aggregate {
                method: method_label(d),
                n,
                mean_f1,
                std_f1: var.sqrt(),
                mean_runtime_ms: mean_rt,
                failed_cells: failed,
            }
        })
        .collect()
}

pub const RESULTS_HEADER: &str =
    "method,n,d,lambda,alpha,replicate,precision,recall,f1,runtime_ms,converged,iterations";

pub fn write_results_csv(path: &Path, rows: &[MetricsRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{:.3},{},{}",
            r.method,
            r.n,
            r.d,
            r.lambda,
            r.alpha,
            r.replicate,
            r.precision,
            r.recall,
            r.f1,
            r.runtime_ms,
            r.converged,
            r.iterations
        )?;
    }
    Ok(())
}

fn write_summary_json(path: &Path, cfg: &ExperimentConfig, table: &ResultTable) -> Result<()> {
    let summary = serde_json::json!({
        "seed": cfg.benchmark.seed,
        "config": cfg,
        "aggregates": table.aggregates,
        "failed_cells": table.failed_cells,
        "total_cells": table.rows.len(),
    });
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &summary)
        .map_err(|e| Error::Numerical(format!("summary serialization: {e}")))?;
    writeln!(w)?;
    Ok(())
}
