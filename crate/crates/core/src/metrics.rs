//! NMSE and achievable-spectral-efficiency evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Reported floor for exact recoveries (the dB value would be -inf).
pub const NMSE_DB_FLOOR: f64 = -200.0;

/// Per-trial evaluation row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub nmse_db: f64,
    pub nmse_linear: f64,
    pub ase_bits: f64,
    pub snr_db: f64,
    pub training_len: usize,
}

/// Single-trial normalized squared error
/// `||estimate - truth||_F^2 / ||truth||_F^2`, returned as
/// `(linear, dB)` with exact recoveries floored at [`NMSE_DB_FLOOR`].
pub fn nmse(estimate: &ComplexMatrix, truth: &ComplexMatrix) -> Result<(f64, f64)> {
    if estimate.shape() != truth.shape() {
        return Err(Error::DimensionMismatch(format!(
            "nmse: {:?} vs {:?}",
            estimate.shape(),
            truth.shape()
        )));
    }
    let denom = truth.norm_squared();
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "nmse undefined for a zero truth matrix".into(),
        ));
    }
    let lin = (estimate - truth).norm_squared() / denom;
    let db = if lin > 0.0 {
        (10.0 * lin.log10()).max(NMSE_DB_FLOOR)
    } else {
        NMSE_DB_FLOOR
    };
    Ok((lin, db))
}

/// Achievable-spectral-efficiency lower bound in bits/sec/Hz:
/// `log2 det(I + (N_T*N_R*(sigma_n^2 + nmse))^{-1} * H*H^H)`
/// with `nmse` in linear scale; the perfect-CSI curve uses `nmse = 0`.
pub fn ase(truth: &ComplexMatrix, nmse_linear: f64, noise_var: f64) -> Result<f64> {
    if noise_var < 0.0 || nmse_linear < 0.0 {
        return Err(Error::InvalidParameter(
            "ase requires nonnegative noise variance and nmse".into(),
        ));
    }
    let denom = (truth.nrows() * truth.ncols()) as f64 * (noise_var + nmse_linear);
    if denom == 0.0 {
        // Degenerate scaling: defined only in the limit for a zero channel.
        if truth.norm() == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::InvalidParameter(
            "ase undefined: sigma_n^2 + nmse = 0 with a nonzero channel".into(),
        ));
    }
    // Eigenvalues of H*H^H are the squared singular values, so the log-det
    // reduces to a sum over them; I + scale*H*H^H is Hermitian PSD with
    // eigenvalues >= 1.
    let sigmas = crate::linalg::singular_values(truth)?;
    let scale = 1.0 / denom;
    Ok(sigmas.iter().map(|s| (1.0 + scale * s * s).log2()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, ChannelConfig};
    use crate::rng::trial_rng;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn channel(n: usize, seed: u64) -> ComplexMatrix {
        let cfg = ChannelConfig {
            n_rx: n,
            n_tx: n,
            n_paths: 2,
            angle_spread_deg: 50.0,
            rng_seed: 0,
        };
        generate_channel(&cfg, &mut trial_rng(seed, 0, 0)).unwrap().h
    }

    #[test]
    fn nmse_basic_cases() {
        let h = channel(8, 1);
        let zero = ComplexMatrix::zeros(8, 8);
        let (lin, db) = nmse(&zero, &h).unwrap();
        assert!((lin - 1.0).abs() < 1e-12);
        assert!(db.abs() < 1e-9);

        let (lin, db) = nmse(&h, &h).unwrap();
        assert_eq!(lin, 0.0);
        assert_eq!(db, NMSE_DB_FLOOR);

        let half = &h * c(0.5, 0.0);
        let (lin, db) = nmse(&half, &h).unwrap();
        assert!((lin - 0.25).abs() < 1e-12);
        assert!((db - (-6.020599913279624)).abs() < 1e-9);
    }

    #[test]
    fn nmse_error_paths() {
        let h = channel(4, 2);
        assert!(nmse(&ComplexMatrix::zeros(3, 4), &h).is_err());
        assert!(nmse(&h, &ComplexMatrix::zeros(4, 4)).is_err());
    }

    #[test]
    fn nmse_scale_consistency() {
        let h = channel(6, 3);
        let est = channel(6, 4);
        let (a, _) = nmse(&est, &h).unwrap();
        let s = c(3.0, -2.0);
        let (b, _) = nmse(&(&est * s), &(&h * s)).unwrap();
        assert!((a - b).abs() / a < 1e-12);
    }

    #[test]
    fn ase_scalar_and_zero() {
        let one = ComplexMatrix::from_element(1, 1, c(1.0, 0.0));
        let v = ase(&one, 0.0, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let zero = ComplexMatrix::zeros(4, 4);
        assert_eq!(ase(&zero, 0.0, 0.5).unwrap(), 0.0);
        assert_eq!(ase(&zero, 0.0, 0.0).unwrap(), 0.0);
        let h = channel(4, 5);
        assert!(ase(&h, 0.0, 0.0).is_err());
    }

    #[test]
    fn ase_decreasing_in_nmse() {
        let h = channel(8, 6);
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let nm = k as f64 * 0.05;
            let v = ase(&h, nm, 0.01).unwrap();
            assert!(v < prev, "ase must strictly decrease, {prev} -> {v}");
            assert!(v >= 0.0);
            prev = v;
        }
    }

    #[test]
    fn perfect_csi_dominates() {
        let h = channel(8, 7);
        for noise_var in [0.001, 0.1, 1.0] {
            let perfect = ase(&h, 0.0, noise_var).unwrap();
            for nm in [1e-4, 1e-2, 0.5, 2.0] {
                assert!(perfect >= ase(&h, nm, noise_var).unwrap());
            }
        }
    }
}
