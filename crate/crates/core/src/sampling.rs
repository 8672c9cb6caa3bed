//! Random entry sampling and the antenna-switching training protocol.
//!
//! Training activates one TX/RX antenna pair per symbol: with combining
//! vector `e_i` and precoding vector `e_j` the receiver observes
//! `r[t] = sqrt(P_t) * H_ij + n[t]`, and the entry estimate is
//! `r[t] / sqrt(P_t)`. One symbol per sampled entry, so `T = M`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::rng::complex_gaussian;

/// The binary mask and its support index list.
#[derive(Debug, Clone)]
pub struct SamplingPattern {
    /// 0/1-valued N_R x N_T matrix.
    pub mask: ComplexMatrix,
    /// Sampled (row, col) pairs, in training order.
    pub support: Vec<(usize, usize)>,
}

impl SamplingPattern {
    pub fn m(&self) -> usize {
        self.support.len()
    }

    pub fn n_rx(&self) -> usize {
        self.mask.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.mask.ncols()
    }
}

/// Draw exactly `m` distinct entry positions uniformly without replacement.
pub fn generate_mask<R: Rng + ?Sized>(
    n_rx: usize,
    n_tx: usize,
    m: usize,
    rng: &mut R,
) -> Result<SamplingPattern> {
    let total = n_rx * n_tx;
    if m > total {
        return Err(Error::InvalidArgument(format!(
            "cannot sample {m} of {total} entries"
        )));
    }
    let mut mask = ComplexMatrix::zeros(n_rx, n_tx);
    let mut support = Vec::with_capacity(m);
    for idx in rand::seq::index::sample(rng, total, m) {
        // Column-major linear index, consistent with vec_columns.
        let (i, j) = (idx % n_rx, idx / n_rx);
        mask[(i, j)] = Complex64::new(1.0, 0.0);
        support.push((i, j));
    }
    Ok(SamplingPattern { mask, support })
}

/// The subsampled noisy channel matrix produced by training.
#[derive(Debug, Clone)]
pub struct ObservedChannel {
    /// Entry estimates on the support, zeros elsewhere.
    pub h_omega: ComplexMatrix,
    pub pattern: SamplingPattern,
    /// Transmit power P_t (linear).
    pub transmit_power: f64,
    /// Noise variance sigma_n^2 (linear).
    pub noise_var: f64,
    /// Number of training symbols, equal to M.
    pub training_len: usize,
}

impl ObservedChannel {
    pub fn n_rx(&self) -> usize {
        self.h_omega.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.h_omega.ncols()
    }
}

/// Run the switching training over the sampled entries.
///
/// For the t-th support entry (i, j): `r = sqrt(P_t) * H_ij + n`,
/// `n ~ CN(0, sigma_n^2)`, and the stored estimate is `r / sqrt(P_t)`.
pub fn simulate_training<R: Rng + ?Sized>(
    h: &ComplexMatrix,
    pattern: SamplingPattern,
    transmit_power: f64,
    noise_var: f64,
    rng: &mut R,
) -> Result<ObservedChannel> {
    if !(transmit_power > 0.0) {
        return Err(Error::InvalidParameter("transmit power must be positive".into()));
    }
    if noise_var < 0.0 {
        return Err(Error::InvalidParameter("noise variance must be nonnegative".into()));
    }
    if h.nrows() != pattern.n_rx() || h.ncols() != pattern.n_tx() {
        return Err(Error::DimensionMismatch(format!(
            "channel {}x{} vs mask {}x{}",
            h.nrows(),
            h.ncols(),
            pattern.n_rx(),
            pattern.n_tx()
        )));
    }
    let sqrt_pt = transmit_power.sqrt();
    let mut h_omega = ComplexMatrix::zeros(h.nrows(), h.ncols());
    for &(i, j) in &pattern.support {
        let r = sqrt_pt * h[(i, j)] + complex_gaussian(rng, noise_var);
        h_omega[(i, j)] = r / sqrt_pt;
    }
    let training_len = pattern.m();
    Ok(ObservedChannel {
        h_omega,
        pattern,
        transmit_power,
        noise_var,
        training_len,
    })
}

/// Serializable observation record (support entries in training order).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservedRecord {
    pub n_rx: usize,
    pub n_tx: usize,
    pub support: Vec<[usize; 2]>,
    /// h_omega values on the support, [re, im], training order.
    pub values: Vec<[f64; 2]>,
    pub transmit_power: f64,
    pub noise_var: f64,
    pub training_len: usize,
}

impl ObservedRecord {
    pub fn new(obs: &ObservedChannel) -> Self {
        ObservedRecord {
            n_rx: obs.n_rx(),
            n_tx: obs.n_tx(),
            support: obs.pattern.support.iter().map(|&(i, j)| [i, j]).collect(),
            values: obs
                .pattern
                .support
                .iter()
                .map(|&(i, j)| {
                    let z = obs.h_omega[(i, j)];
                    [z.re, z.im]
                })
                .collect(),
            transmit_power: obs.transmit_power,
            noise_var: obs.noise_var,
            training_len: obs.training_len,
        }
    }
}
