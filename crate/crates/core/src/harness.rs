//! Monte Carlo experiment runner: seeded sweeps over (paths, SNR, T) grids
//! with CSV/JSON output.
//!
//! Determinism contract: every (grid point, trial) cell derives its own RNG
//! from `(master_seed, grid index, trial)`, all algorithms of a cell share
//! one observation, and rows are sorted before emission. Two runs of the
//! same config produce identical rows regardless of parallel scheduling.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{self, AdmmConfig, SolverTrace, TauNorm};
use crate::baselines::{self, OmpConfig, SvtConfig};
use crate::channel::{generate_channel, ChannelConfig};
use crate::error::{Error, Result};
use crate::linalg::dft_matrix;
use crate::metrics;
use crate::rng::trial_rng;
use crate::sampling::{generate_mask, simulate_training};

/// Estimators the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    Admm,
    Svt,
    Omp,
}

impl Algorithm {
    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::Admm => "admm",
            Algorithm::Svt => "svt",
            Algorithm::Omp => "omp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "admm" => Ok(Algorithm::Admm),
            "svt" => Ok(Algorithm::Svt),
            "omp" => Ok(Algorithm::Omp),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' (expected admm|svt|omp)"
            ))),
        }
    }
}

/// Full sweep description. The grid is the cross product
/// `n_paths_list x snr_db_list x training_len_list`, enumerated in that
/// nesting order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_paths_list: Vec<usize>,
    pub snr_db_list: Vec<f64>,
    /// Training lengths T; each maps to M = T sampled entries.
    pub training_len_list: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub master_seed: u64,
    pub max_iters: usize,
    pub angle_spread_deg: f64,
    /// Override the default ADMM stepsize (None keeps 0.005).
    pub rho: Option<f64>,
    /// Norm feeding the tau_h rule.
    pub tau_norm: TauNorm,
    /// Measure wall time per row. Off by default: timing jitter would break
    /// the byte-identical-output determinism contract.
    pub record_timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_rx: 32,
            n_tx: 32,
            n_paths_list: vec![2],
            snr_db_list: vec![30.0],
            training_len_list: vec![512],
            algorithms: vec![Algorithm::Admm, Algorithm::Svt, Algorithm::Omp],
            trials: 100,
            master_seed: 1,
            max_iters: 100,
            angle_spread_deg: 50.0,
            rho: None,
            tau_norm: TauNorm::Spectral,
            record_timings: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rx == 0 || self.n_tx == 0 {
            return Err(Error::Config("antenna counts must be >= 1".into()));
        }
        if self.n_paths_list.is_empty()
            || self.snr_db_list.is_empty()
            || self.training_len_list.is_empty()
        {
            return Err(Error::Config("grid axes must be non-empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        let total = self.n_rx * self.n_tx;
        for &t in &self.training_len_list {
            if t > total {
                return Err(Error::Config(format!(
                    "training length {t} exceeds {} entries",
                    total
                )));
            }
        }
        if self.n_paths_list.iter().any(|&p| p == 0) {
            return Err(Error::Config("path counts must be >= 1".into()));
        }
        Ok(())
    }

    /// Grid points in enumeration order: (grid_index, n_paths, snr_db, T).
    pub fn grid(&self) -> Vec<(u64, usize, f64, usize)> {
        let mut points = Vec::new();
        let mut g = 0u64;
        for &np in &self.n_paths_list {
            for &snr in &self.snr_db_list {
                for &t in &self.training_len_list {
                    points.push((g, np, snr, t));
                    g += 1;
                }
            }
        }
        points
    }
}

/// One algorithm run on one trial of one grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    /// Algorithm tag; suffixed with ":error" when the solver failed.
    pub algorithm: String,
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_paths: usize,
    pub snr_db: f64,
    pub t: usize,
    pub trial: usize,
    pub nmse_db: f64,
    pub ase_bits: f64,
    pub wall_time_ms: f64,
    pub iterations_run: usize,
}

pub const CSV_HEADER: &str =
    "algorithm,n_rx,n_tx,n_paths,snr_db,t,trial,nmse_db,ase_bits,wall_time_ms,iterations_run";

fn snr_to_noise_var(snr_db: f64) -> f64 {
    // P_t = 1; SNR = 10*log10(P_t / sigma_n^2).
    10f64.powf(-snr_db / 10.0)
}

/// Run every (grid point, trial, algorithm) cell and return sorted rows.
///
/// Trials run in parallel; a solver failure is recorded in its row (NaN
/// metrics, ":error" tag) and the sweep continues.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let d_r = dft_matrix(cfg.n_rx)?;
    let d_t = dft_matrix(cfg.n_tx)?;
    let grid = cfg.grid();

    let jobs: Vec<(u64, usize, f64, usize, usize)> = grid
        .iter()
        .flat_map(|&(g, np, snr, t)| (0..cfg.trials).map(move |trial| (g, np, snr, t, trial)))
        .collect();

    let mut rows: Vec<(u64, Vec<ResultRow>)> = jobs
        .par_iter()
        .map(|&(g, np, snr, t, trial)| {
            let rows = run_cell(cfg, &d_r, &d_t, g, np, snr, t, trial);
            (g, rows)
        })
        .collect();

    // Deterministic emission order: (algorithm, grid point, trial).
    let mut flat: Vec<(String, u64, usize, ResultRow)> = rows
        .drain(..)
        .flat_map(|(g, rs)| {
            rs.into_iter()
                .map(move |r| (r.algorithm.clone(), g, r.trial, r))
        })
        .collect();
    flat.sort_by(|a, b| (&a.0, a.1, a.2).cmp(&(&b.0, b.1, b.2)));
    Ok(flat.into_iter().map(|(_, _, _, r)| r).collect())
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    cfg: &ExperimentConfig,
    d_r: &crate::linalg::ComplexMatrix,
    d_t: &crate::linalg::ComplexMatrix,
    grid_index: u64,
    n_paths: usize,
    snr_db: f64,
    t: usize,
    trial: usize,
) -> Vec<ResultRow> {
    let mut rng = trial_rng(cfg.master_seed, grid_index, trial as u64);
    let noise_var = snr_to_noise_var(snr_db);
    let chan_cfg = ChannelConfig {
        n_rx: cfg.n_rx,
        n_tx: cfg.n_tx,
        n_paths,
        angle_spread_deg: cfg.angle_spread_deg,
        rng_seed: cfg.master_seed,
    };

    let base_row = |alg: &Algorithm| ResultRow {
        algorithm: alg.tag().to_string(),
        n_rx: cfg.n_rx,
        n_tx: cfg.n_tx,
        n_paths,
        snr_db,
        t,
        trial,
        nmse_db: f64::NAN,
        ase_bits: f64::NAN,
        wall_time_ms: 0.0,
        iterations_run: 0,
    };

    // Channel, mask, observation drawn once; algorithms share them.
    let prepared = generate_channel(&chan_cfg, &mut rng).and_then(|real| {
        let pattern = generate_mask(cfg.n_rx, cfg.n_tx, t, &mut rng)?;
        let obs = simulate_training(&real.h, pattern, 1.0, noise_var, &mut rng)?;
        Ok((real, obs))
    });
    let (real, obs) = match prepared {
        Ok(v) => v,
        Err(e) => {
            eprintln!("grid {grid_index} trial {trial}: setup failed: {e}");
            return cfg
                .algorithms
                .iter()
                .map(|a| {
                    let mut r = base_row(a);
                    r.algorithm = format!("{}:error", a.tag());
                    r
                })
                .collect();
        }
    };

    cfg.algorithms
        .iter()
        .map(|alg| {
            let mut row = base_row(alg);
            let start = Instant::now();
            let outcome: Result<(crate::linalg::ComplexMatrix, usize)> = match alg {
                Algorithm::Admm => admm::default_params(&obs, cfg.tau_norm).and_then(
                    |(tau_h, tau_s, rho_default)| {
                        let solver_cfg = AdmmConfig {
                            rho: cfg.rho.unwrap_or(rho_default),
                            tau_h,
                            tau_s,
                            max_iters: cfg.max_iters,
                            residual_tol: 0.0,
                        };
                        admm::solve(&obs, d_r, d_t, &solver_cfg, None)
                            .map(|(est, trace)| (est, trace.len()))
                    },
                ),
                Algorithm::Svt => SvtConfig::default_for(&obs, cfg.max_iters)
                    .and_then(|svt_cfg| baselines::solve_svt(&obs, &svt_cfg))
                    .map(|est| (est, cfg.max_iters)),
                Algorithm::Omp => baselines::solve_omp(
                    &obs,
                    d_r,
                    d_t,
                    &OmpConfig {
                        sparsity: n_paths,
                        residual_tol: 0.0,
                    },
                )
                .map(|est| (est, n_paths)),
            };
            if cfg.record_timings {
                row.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            }
            match outcome {
                Ok((est, iters)) => {
                    row.iterations_run = iters;
                    match metrics::nmse(&est, &real.h) {
                        Ok((lin, db)) => {
                            row.nmse_db = db;
                            row.ase_bits =
                                metrics::ase(&real.h, lin, noise_var).unwrap_or(f64::NAN);
                        }
                        Err(e) => {
                            eprintln!("grid {grid_index} trial {trial} {alg}: {e}");
                            row.algorithm = format!("{}:error", alg.tag());
                        }
                    }
                }
                Err(e) => {
                    eprintln!("grid {grid_index} trial {trial} {alg}: {e}");
                    row.algorithm = format!("{}:error", alg.tag());
                }
            }
            row
        })
        .collect()
}

/// Convergence trace of one representative seed (trial 0) at a single grid
/// point, for the first selected algorithm (admm or svt).
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<SolverTrace> {
    cfg.validate()?;
    if cfg.grid().len() != 1 {
        return Err(Error::Config(
            "convergence runs expect a single grid point (one n_paths, one snr, one t)".into(),
        ));
    }
    let alg = cfg.algorithms[0];
    if alg == Algorithm::Omp {
        return Err(Error::Config(
            "convergence traces are defined for admm or svt".into(),
        ));
    }
    let d_r = dft_matrix(cfg.n_rx)?;
    let d_t = dft_matrix(cfg.n_tx)?;
    let (_, np, snr, t) = cfg.grid()[0];
    let noise_var = snr_to_noise_var(snr);
    let mut rng = trial_rng(cfg.master_seed, 0, 0);
    let chan_cfg = ChannelConfig {
        n_rx: cfg.n_rx,
        n_tx: cfg.n_tx,
        n_paths: np,
        angle_spread_deg: cfg.angle_spread_deg,
        rng_seed: cfg.master_seed,
    };
    let real = generate_channel(&chan_cfg, &mut rng)?;
    let pattern = generate_mask(cfg.n_rx, cfg.n_tx, t, &mut rng)?;
    let obs = simulate_training(&real.h, pattern, 1.0, noise_var, &mut rng)?;

    match alg {
        Algorithm::Admm => {
            let (tau_h, tau_s, rho_default) = admm::default_params(&obs, cfg.tau_norm)?;
            let solver_cfg = AdmmConfig {
                rho: cfg.rho.unwrap_or(rho_default),
                tau_h,
                tau_s,
                max_iters: cfg.max_iters,
                residual_tol: 0.0,
            };
            let (_, trace) = admm::solve(&obs, &d_r, &d_t, &solver_cfg, Some(&real.h))?;
            Ok(trace)
        }
        Algorithm::Svt => {
            let svt_cfg = SvtConfig::default_for(&obs, cfg.max_iters)?;
            let (_, trace) = baselines::solve_svt_traced(&obs, &svt_cfg, Some(&real.h))?;
            Ok(trace)
        }
        Algorithm::Omp => unreachable!(),
    }
}

/// Mean of per-trial dB values (the expectation sits inside the dB form).
pub fn mean_db(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// `%.6g`-style formatting: six significant digits, fixed or scientific.
pub fn format_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        let mantissa = format!("{:.5e}", x);
        // Trim trailing zeros inside the mantissa: "1.50000e7" -> "1.5e7".
        if let Some(epos) = mantissa.find('e') {
            let (m, e) = mantissa.split_at(epos);
            let m = m.trim_end_matches('0').trim_end_matches('.');
            format!("{m}{e}")
        } else {
            mantissa
        }
    } else {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

fn row_fields(r: &ResultRow) -> [String; 11] {
    [
        r.algorithm.clone(),
        r.n_rx.to_string(),
        r.n_tx.to_string(),
        r.n_paths.to_string(),
        format_g6(r.snr_db),
        r.t.to_string(),
        r.trial.to_string(),
        format_g6(r.nmse_db),
        format_g6(r.ase_bits),
        format_g6(r.wall_time_ms),
        r.iterations_run.to_string(),
    ]
}

/// Fixed-header CSV, one line per row.
pub fn write_rows_csv<W: Write>(rows: &[ResultRow], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", row_fields(r).join(","))?;
    }
    Ok(())
}

fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(5 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// JSON array of row objects, floats rounded to six significant digits.
pub fn write_rows_json<W: Write>(rows: &[ResultRow], w: &mut W) -> std::io::Result<()> {
    let rounded: Vec<ResultRow> = rows
        .iter()
        .map(|r| ResultRow {
            snr_db: round_sig6(r.snr_db),
            nmse_db: round_sig6(r.nmse_db),
            ase_bits: round_sig6(r.ase_bits),
            wall_time_ms: round_sig6(r.wall_time_ms),
            ..r.clone()
        })
        .collect();
    serde_json::to_writer_pretty(&mut *w, &rounded)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::Other, e))?;
    writeln!(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format '{other}' (expected csv|json)"
            ))),
        }
    }
}

/// Write rows to a file in the requested format, with path context on error.
pub fn emit(rows: &[ResultRow], path: &Path, format: OutputFormat) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_rows_csv(rows, &mut w).map_err(io_err)?,
        OutputFormat::Json => write_rows_json(rows, &mut w).map_err(io_err)?,
    }
    Ok(())
}
