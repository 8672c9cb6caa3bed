//! Flat key-value config files for the CLI.
//!
//! Format: one `key = value` pair per line, `#` comments, blank lines
//! ignored. Lists are comma-separated. Recognized keys:
//!
//! ```text
//! n_rx, n_tx        antenna counts
//! n_paths           path-count list, e.g. "2,4,8"
//! snr_db            SNR list in dB, e.g. "0,10,20,30"
//! t                 training-length list, e.g. "300,500,1000"
//! algorithms        subset of admm,svt,omp
//! trials            Monte Carlo trials per grid point
//! seed              master seed
//! max_iters         solver iteration budget
//! rho               ADMM stepsize override
//! tau_norm          spectral | frobenius
//! angle_spread_deg  Laplace angle std in degrees
//! timings           true | false
//! ```
//!
//! CLI flags override file values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{Algorithm, ExperimentConfig};

/// Parse `key = value` lines.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn load_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_kv(&text)
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{item}'")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

/// Overlay file values onto an experiment config.
pub fn apply(map: &BTreeMap<String, String>, cfg: &mut ExperimentConfig) -> Result<()> {
    for (key, value) in map {
        match key.as_str() {
            "n_rx" => cfg.n_rx = parse_one(key, value)?,
            "n_tx" => cfg.n_tx = parse_one(key, value)?,
            "n_paths" => cfg.n_paths_list = parse_list(key, value)?,
            "snr_db" => cfg.snr_db_list = parse_list(key, value)?,
            "t" => cfg.training_len_list = parse_list(key, value)?,
            "algorithms" => {
                cfg.algorithms = value
                    .split(',')
                    .map(|s| s.trim().parse::<Algorithm>())
                    .collect::<Result<Vec<_>>>()?
            }
            "trials" => cfg.trials = parse_one(key, value)?,
            "seed" => cfg.master_seed = parse_one(key, value)?,
            "max_iters" => cfg.max_iters = parse_one(key, value)?,
            "rho" => cfg.rho = Some(parse_one(key, value)?),
            "tau_norm" => cfg.tau_norm = value.parse()?,
            "angle_spread_deg" => cfg.angle_spread_deg = parse_one(key, value)?,
            "timings" => cfg.record_timings = parse_one(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown config key '{other}'")));
            }
        }
    }
    Ok(())
}
