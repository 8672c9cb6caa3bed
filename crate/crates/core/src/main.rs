//! `mimo-mc`: Monte Carlo sweeps for masked-entry mmWave channel estimation.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mimo_mc::channel::{generate_channel, ChannelConfig, ChannelRecord};
use mimo_mc::config;
use mimo_mc::error::Error;
use mimo_mc::harness::{
    emit, run_convergence, run_sweep, write_rows_csv, write_rows_json, Algorithm,
    ExperimentConfig, OutputFormat,
};
use mimo_mc::rng::trial_rng;
use mimo_mc::sampling::{generate_mask, simulate_training, ObservedRecord};

#[derive(Parser)]
#[command(
    name = "mimo-mc",
    version,
    about = "Seeded Monte Carlo sweeps for mmWave MIMO channel estimation \
             (joint low-rank + beamspace-sparse completion, SVT and OMP baselines)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key-value config file; CLI flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv | json.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    /// Comma-separated subset of admm,svt,omp.
    #[arg(long, global = true)]
    algorithms: Option<String>,
    /// Master seed for all derived random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n_rx: Option<usize>,
    #[arg(long, global = true)]
    n_tx: Option<usize>,
    /// Monte Carlo trials per grid point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Solver iteration budget.
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// ADMM stepsize override.
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// Norm in the tau_h rule: spectral | frobenius.
    #[arg(long, global = true)]
    tau_norm: Option<String>,
    /// Laplace angle spread (std, degrees).
    #[arg(long, global = true)]
    angle_spread: Option<f64>,
    /// Record per-row wall time (breaks byte-for-byte rerun identity).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// NMSE and ASE versus transmit SNR at fixed T and path count.
    SweepSnr {
        /// SNR grid in dB, e.g. 0,10,20,30.
        #[arg(long, value_delimiter = ',')]
        snr: Option<Vec<f64>>,
        /// Training length T (= sampled entries M).
        #[arg(long)]
        t: Option<usize>,
        /// Number of propagation paths.
        #[arg(long)]
        paths: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// NMSE versus training length T at fixed SNR and path count.
    SweepT {
        /// T grid, e.g. 300,500,1000.
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<usize>>,
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// NMSE versus the number of propagation paths.
    SweepPaths {
        /// Path-count grid, e.g. 2,4,8.
        #[arg(long, value_delimiter = ',')]
        paths: Option<Vec<usize>>,
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long)]
        t: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Per-iteration residuals and NMSE for one representative seed.
    Convergence {
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        paths: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Dump a channel realization (and optionally one observation) as JSON.
    Generate {
        #[arg(long)]
        paths: Option<usize>,
        /// Also include a subsampled observation with this training length.
        #[arg(long)]
        t: Option<usize>,
        /// SNR of the included observation, dB.
        #[arg(long)]
        snr: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Serialize)]
struct GenerateRecord {
    channel: ChannelRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    observed: Option<ObservedRecord>,
}

fn build_config(common: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &common.config {
        config::apply(&config::load_file(path)?, &mut cfg)?;
    }
    if let Some(v) = common.n_rx {
        cfg.n_rx = v;
    }
    if let Some(v) = common.n_tx {
        cfg.n_tx = v;
    }
    if let Some(v) = common.trials {
        cfg.trials = v;
    }
    if let Some(v) = common.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = common.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = common.rho {
        cfg.rho = Some(v);
    }
    if let Some(v) = &common.tau_norm {
        cfg.tau_norm = v.parse()?;
    }
    if let Some(v) = common.angle_spread {
        cfg.angle_spread_deg = v;
    }
    if common.timings {
        cfg.record_timings = true;
    }
    if let Some(list) = &common.algorithms {
        cfg.algorithms = list
            .split(',')
            .map(|s| s.trim().parse::<Algorithm>())
            .collect::<Result<Vec<_>, _>>()?;
    }
    Ok(cfg)
}

fn write_output(common: &CommonArgs, bytes: &[u8]) -> Result<(), Error> {
    match &common.out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn emit_rows(
    common: &CommonArgs,
    rows: &[mimo_mc::harness::ResultRow],
) -> Result<(), Error> {
    let format: OutputFormat = common.format.parse()?;
    match &common.out {
        Some(path) => {
            emit(rows, path, format)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
            Ok(())
        }
        None => {
            let mut buf = Vec::new();
            let res = match format {
                OutputFormat::Csv => write_rows_csv(rows, &mut buf),
                OutputFormat::Json => write_rows_json(rows, &mut buf),
            };
            res.map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
            write_output(common, &buf)
        }
    }
}

fn run_sweep_command(cfg: &ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    eprintln!(
        "sweep: {}x{} grid points={} trials={} algorithms={}",
        cfg.n_rx,
        cfg.n_tx,
        cfg.grid().len(),
        cfg.trials,
        cfg.algorithms
            .iter()
            .map(|a| a.tag())
            .collect::<Vec<_>>()
            .join(",")
    );
    let rows = run_sweep(cfg)?;
    emit_rows(common, &rows)
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::SweepSnr {
            snr,
            t,
            paths,
            common,
        } => {
            let mut cfg = build_config(&common)?;
            if let Some(list) = snr {
                cfg.snr_db_list = list;
            }
            if let Some(t) = t {
                cfg.training_len_list = vec![t];
            }
            if let Some(p) = paths {
                cfg.n_paths_list = vec![p];
            }
            run_sweep_command(&cfg, &common)
        }
        Command::SweepT {
            t,
            snr,
            paths,
            common,
        } => {
            let mut cfg = build_config(&common)?;
            if let Some(list) = t {
                cfg.training_len_list = list;
            }
            if let Some(s) = snr {
                cfg.snr_db_list = vec![s];
            }
            if let Some(p) = paths {
                cfg.n_paths_list = vec![p];
            }
            run_sweep_command(&cfg, &common)
        }
        Command::SweepPaths {
            paths,
            snr,
            t,
            common,
        } => {
            let mut cfg = build_config(&common)?;
            if let Some(list) = paths {
                cfg.n_paths_list = list;
            }
            if let Some(s) = snr {
                cfg.snr_db_list = vec![s];
            }
            if let Some(t) = t {
                cfg.training_len_list = vec![t];
            }
            run_sweep_command(&cfg, &common)
        }
        Command::Convergence {
            snr,
            t,
            paths,
            common,
        } => {
            let mut cfg = build_config(&common)?;
            if let Some(s) = snr {
                cfg.snr_db_list = vec![s];
            }
            if let Some(t) = t {
                cfg.training_len_list = vec![t];
            }
            if let Some(p) = paths {
                cfg.n_paths_list = vec![p];
            }
            eprintln!(
                "convergence: {}x{} algorithm={} iters={}",
                cfg.n_rx,
                cfg.n_tx,
                cfg.algorithms.first().map(|a| a.tag()).unwrap_or("none"),
                cfg.max_iters
            );
            let trace = run_convergence(&cfg)?;
            let mut buf = Vec::new();
            trace.write_csv(&mut buf).map_err(|source| Error::Io {
                path: PathBuf::from("<trace>"),
                source,
            })?;
            write_output(&common, &buf)
        }
        Command::Generate {
            paths,
            t,
            snr,
            common,
        } => {
            let cfg = build_config(&common)?;
            let chan_cfg = ChannelConfig {
                n_rx: cfg.n_rx,
                n_tx: cfg.n_tx,
                n_paths: paths.unwrap_or_else(|| cfg.n_paths_list[0]),
                angle_spread_deg: cfg.angle_spread_deg,
                rng_seed: cfg.master_seed,
            };
            let mut rng = trial_rng(chan_cfg.rng_seed, 0, 0);
            let real = generate_channel(&chan_cfg, &mut rng)?;
            let observed = match t {
                Some(t) => {
                    let noise_var = 10f64.powf(-snr.unwrap_or(30.0) / 10.0);
                    let pattern = generate_mask(cfg.n_rx, cfg.n_tx, t, &mut rng)?;
                    let obs = simulate_training(&real.h, pattern, 1.0, noise_var, &mut rng)?;
                    Some(ObservedRecord::new(&obs))
                }
                None => None,
            };
            let record = GenerateRecord {
                channel: ChannelRecord::new(&chan_cfg, &real),
                observed,
            };
            let mut json = serde_json::to_vec_pretty(&record).map_err(|e| {
                Error::Config(format!("serialization failed: {e}"))
            })?;
            json.push(b'\n');
            write_output(&common, &json)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) | Err(e @ Error::InvalidArgument(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
