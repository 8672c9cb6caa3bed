//! Deterministic per-trial random streams.
//!
//! Every Monte Carlo trial owns an independent ChaCha stream derived from
//! `(master_seed, grid_index, trial)`, so results do not depend on execution
//! order or parallelism.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

const STREAM_TAG: u64 = 0x4d43_4353; // "MCCS"

/// RNG for one (grid point, trial) cell of a sweep.
pub fn trial_rng(master_seed: u64, grid_index: u64, trial: u64) -> ChaCha12Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&grid_index.to_le_bytes());
    seed[16..24].copy_from_slice(&trial.to_le_bytes());
    seed[24..32].copy_from_slice(&STREAM_TAG.to_le_bytes());
    ChaCha12Rng::from_seed(seed)
}

/// Circularly-symmetric complex Gaussian with total variance `var`
/// (`var/2` per real dimension).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    if var == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let n = Normal::new(0.0, (var / 2.0).sqrt()).expect("finite std");
    Complex64::new(n.sample(rng), n.sample(rng))
}

/// Zero-mean Laplace draw with the given standard deviation
/// (scale `b = std/sqrt(2)`), via inverse CDF.
pub fn laplace<R: Rng + ?Sized>(rng: &mut R, std_dev: f64) -> f64 {
    let b = std_dev / 2f64.sqrt();
    // u in (-0.5, 0.5); the half-open end of random() makes u = -0.5 possible
    // only at measure zero, clamp anyway.
    let u = (rng.random::<f64>() - 0.5).clamp(-0.5 + 1e-16, 0.5 - 1e-16);
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}
