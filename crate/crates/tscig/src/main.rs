//! Command-line driver for simulation, ground truth, estimation, tuning,
//! and the full Monte Carlo experiment.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tscig::embedding::{build_lagged_embedding, sample_covariance, TimeSeries};
use tscig::error::Error;
use tscig::graph::{infer_edges, W_EDGE_TOL};
use tscig::harness::{run_experiment, tune, ExperimentConfig, TuningMode};
use tscig::io;
use tscig::solver::{admm_solve, AdmmConfig, PenaltyConfig};
use tscig::spectral::{true_edge_set, FrequencyGrid, TRUE_EDGE_THRESHOLD};
use tscig::synthdata::{gen_models, simulate_var};

#[derive(Parser)]
#[command(name = "tscig", about = "Time series conditional independence graph estimation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Experiment configuration (TOML). Flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count for simulation.
    #[arg(long)]
    n: Option<usize>,
    /// Output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    eps_abs: Option<f64>,
    #[arg(long)]
    eps_rel: Option<f64>,
    #[arg(long)]
    adaptive_rho: bool,
}

impl SolverArgs {
    fn apply(&self, cfg: &mut AdmmConfig) {
        if let Some(v) = self.rho {
            cfg.rho = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.eps_abs {
            cfg.eps_abs = v;
        }
        if let Some(v) = self.eps_rel {
            cfg.eps_rel = v;
        }
        if self.adaptive_rho {
            cfg.adaptive_rho = true;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate benchmark VAR data and write the time series.
    Simulate {
        #[command(flatten)]
        common: ConfigArgs,
        /// Output path; `.bin` extension selects the binary format.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the true edge set of the benchmark models.
    Truth {
        #[command(flatten)]
        common: ConfigArgs,
        /// Output edge list CSV.
        #[arg(long)]
        out: PathBuf,
        /// Also write a 0/1 adjacency matrix here.
        #[arg(long)]
        adjacency: Option<PathBuf>,
    },
    /// Single solve on provided data; writes the estimated edge set.
    Estimate {
        /// Input time series (CSV or `.bin`).
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Subtract empirical component means before embedding.
        #[arg(long)]
        demean: bool,
        #[arg(long)]
        out: PathBuf,
        /// Write per-iteration residual trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Grid search over (lambda, alpha) on provided data.
    Tune {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Comma-separated lambda grid.
        #[arg(long, value_delimiter = ',')]
        lambda_grid: Vec<f64>,
        /// Comma-separated alpha grid.
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        alpha_grid: Vec<f64>,
        /// Tuning mode: oracle_f1 needs --truth, bic does not.
        #[arg(long, default_value = "bic")]
        mode: String,
        /// True edge set CSV (required for oracle_f1).
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        demean: bool,
        /// Write the selected edge set here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Full Monte Carlo experiment from a config file.
    Experiment {
        #[command(flatten)]
        common: ConfigArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Dump true/estimated edge sets per cell.
        #[arg(long)]
        save_edges: bool,
    },
}

fn load_config(common: &ConfigArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_toml_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.benchmark.seed = seed;
    }
    if let Some(n) = common.n {
        cfg.benchmark.n = n;
    }
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn read_series(path: &PathBuf) -> Result<TimeSeries, Error> {
    if path.extension().is_some_and(|e| e == "bin") {
        io::read_time_series_bin(path)
    } else {
        io::read_time_series_csv(path)
    }
}

fn run() -> Result<bool, Error> {
    match Cli::parse().command {
        Command::Simulate { common, out } => {
            let cfg = load_config(&common)?;
            let models = gen_models(&cfg.benchmark)?;
            let ts = simulate_var(
                &models,
                cfg.benchmark.n,
                cfg.benchmark.burn_in,
                cfg.benchmark.seed,
            )?;
            if out.extension().is_some_and(|e| e == "bin") {
                io::write_time_series_bin(&out, &ts)?;
            } else {
                io::write_time_series_csv(&out, &ts)?;
            }
            eprintln!(
                "wrote {} x {} series to {}",
                ts.num_components(),
                ts.num_samples(),
                out.display()
            );
            Ok(false)
        }
        Command::Truth {
            common,
            out,
            adjacency,
        } => {
            let cfg = load_config(&common)?;
            let models = gen_models(&cfg.benchmark)?;
            let edges = true_edge_set(&models, &FrequencyGrid::default(), TRUE_EDGE_THRESHOLD)?;
            io::write_edge_set(&out, &edges)?;
            if let Some(adj) = adjacency {
                io::write_adjacency_csv(&adj, &edges)?;
            }
            eprintln!(
                "wrote {} true edges over {} nodes to {}",
                edges.len(),
                edges.num_nodes(),
                out.display()
            );
            Ok(false)
        }
        Command::Estimate {
            data,
            d,
            lambda,
            alpha,
            demean,
            out,
            trace,
            solver,
        } => {
            let ts = read_series(&data)?;
            let ts = if demean { ts.demeaned() } else { ts };
            let y = build_lagged_embedding(&ts, d)?;
            let sigma = sample_covariance(&y)?;
            let mut admm = AdmmConfig {
                record_trace: trace.is_some(),
                ..AdmmConfig::default()
            };
            solver.apply(&mut admm);
            let penalty = PenaltyConfig::new(lambda, alpha)?;
            let result = admm_solve(&sigma, &penalty, &admm)?;
            let edges = infer_edges(&result.w, W_EDGE_TOL);
            io::write_edge_set(&out, &edges)?;
            if let Some(path) = trace {
                use std::io::Write;
                let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
                writeln!(w, "iteration,primal_residual,dual_residual,rho")?;
                for row in &result.trace {
                    writeln!(
                        w,
                        "{},{},{},{}",
                        row.iteration, row.primal_residual, row.dual_residual, row.rho
                    )?;
                }
            }
            eprintln!(
                "{} edges, converged={}, iterations={}, objective={:.6}",
                edges.len(),
                result.converged,
                result.iterations,
                result.objective
            );
            Ok(false)
        }
        Command::Tune {
            data,
            d,
            lambda_grid,
            alpha_grid,
            mode,
            truth,
            demean,
            out,
            solver,
        } => {
            let mode = match mode.as_str() {
                "oracle_f1" => TuningMode::OracleF1,
                "bic" => TuningMode::Bic,
                other => {
                    return Err(Error::Config(format!(
                        "unknown tuning mode '{other}' (use oracle_f1 or bic)"
                    )))
                }
            };
            let ts = read_series(&data)?;
            let ts = if demean { ts.demeaned() } else { ts };
            let y = build_lagged_embedding(&ts, d)?;
            let sigma = sample_covariance(&y)?;
            let truth_edges = truth
                .map(|path| io::read_edge_set(&path, ts.num_components()))
                .transpose()?;
            let mut admm = AdmmConfig::default();
            solver.apply(&mut admm);
            let lambda_grid = if lambda_grid.is_empty() {
                tscig::harness::log_space(1e-3, 1.0, 20)
            } else {
                lambda_grid
            };
            let outcome = tune(
                &sigma,
                y.num_samples(),
                &lambda_grid,
                &alpha_grid,
                truth_edges.as_ref(),
                mode,
                &admm,
                W_EDGE_TOL,
            )?;
            let edges = infer_edges(&outcome.result.w, W_EDGE_TOL);
            if let Some(path) = out {
                io::write_edge_set(&path, &edges)?;
            }
            println!("lambda={} alpha={} edges={}", outcome.lambda, outcome.alpha, edges.len());
            Ok(false)
        }
        Command::Experiment {
            common,
            solver,
            save_edges,
        } => {
            let mut cfg = load_config(&common)?;
            solver.apply(&mut cfg.solver);
            if save_edges {
                cfg.save_edges = true;
            }
            let table = run_experiment(&cfg)?;
            for agg in &table.aggregates {
                println!(
                    "{} n={}: mean F1 = {:.4} (std {:.4}), mean runtime {:.1} ms",
                    agg.method, agg.n, agg.mean_f1, agg.std_f1, agg.mean_runtime_ms
                );
            }
            eprintln!(
                "wrote {} rows to {}",
                table.rows.len(),
                cfg.output_dir.join("results.csv").display()
            );
            Ok(table.failed_cells > 0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(false) => ExitCode::from(0),
        Ok(true) => ExitCode::from(2),
        Err(e @ Error::Config(_)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
