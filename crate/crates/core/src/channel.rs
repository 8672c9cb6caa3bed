//! Geometric mmWave MIMO channel generation and the antenna/beamspace maps.
//!
//! A channel is a sum of `N_p` rank-one path terms
//! `H = sqrt(N_R*N_T/N_p) * sum_k alpha_k * a_R(phi_R^k) * a_T^H(phi_T^k)`
//! with i.i.d. `CN(0, 1/2)` path gains and Laplace-distributed azimuth
//! angles. The `sqrt(N_R*N_T/N_p)` factor is the usual uniform-array gain
//! normalization; it keeps the average per-entry channel power at `E|alpha|^2`
//! independent of the array sizes and path count.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::rng::{complex_gaussian, laplace};

/// Parameters of the geometric channel model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_paths: usize,
    /// Standard deviation of the Laplace azimuth distribution, degrees.
    pub angle_spread_deg: f64,
    pub rng_seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rx == 0 || self.n_tx == 0 {
            return Err(Error::InvalidDimension("antenna counts must be >= 1".into()));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidArgument("n_paths must be >= 1".into()));
        }
        if !(self.angle_spread_deg > 0.0) {
            return Err(Error::InvalidArgument(
                "angle_spread_deg must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A ground-truth channel together with the path parameters that generated it.
///
/// `gains` carry the array-gain normalization, so the stored parameters
/// reproduce `h` exactly: `h = sum_k gains[k] * a_R(aoa_k) * a_T^H(aod_k)`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub gains: Vec<Complex64>,
    pub aoa_deg: Vec<f64>,
    pub aod_deg: Vec<f64>,
}

/// Raw per-path draws before array-gain scaling.
#[derive(Debug, Clone)]
pub struct PathParams {
    /// i.i.d. CN(0, 1/2) gains.
    pub gains: Vec<Complex64>,
    pub aoa_deg: Vec<f64>,
    pub aod_deg: Vec<f64>,
}

/// Unit-norm ULA steering vector, half-wavelength spacing:
/// `(1/sqrt(n)) * [1, e^{i*pi*sin(phi)}, ..., e^{i*pi*(n-1)*sin(phi)}]`.
pub fn ula_response(n: usize, azimuth_rad: f64) -> ComplexVector {
    let scale = 1.0 / (n as f64).sqrt();
    let s = azimuth_rad.sin();
    ComplexVector::from_fn(n, |k, _| {
        Complex64::from_polar(scale, std::f64::consts::PI * (k as f64) * s)
    })
}

/// Wrap an angle into (-90, 90] degrees (period 180).
pub fn wrap_angle_deg(x: f64) -> f64 {
    let w = (x + 90.0).rem_euclid(180.0) - 90.0;
    if w == -90.0 {
        90.0
    } else {
        w
    }
}

/// Draw path gains and Laplace angles for one channel realization.
/// Angles are wrapped into (-90, 90] so `sin(phi)` stays well defined
/// for ULA steering.
pub fn sample_path_params<R: Rng + ?Sized>(cfg: &ChannelConfig, rng: &mut R) -> PathParams {
    let mut gains = Vec::with_capacity(cfg.n_paths);
    let mut aoa = Vec::with_capacity(cfg.n_paths);
    let mut aod = Vec::with_capacity(cfg.n_paths);
    for _ in 0..cfg.n_paths {
        gains.push(complex_gaussian(rng, 0.5));
        aod.push(wrap_angle_deg(laplace(rng, cfg.angle_spread_deg)));
        aoa.push(wrap_angle_deg(laplace(rng, cfg.angle_spread_deg)));
    }
    PathParams {
        gains,
        aoa_deg: aoa,
        aod_deg: aod,
    }
}

impl ChannelRealization {
    /// Assemble a channel from explicit path parameters (already scaled).
    pub fn from_paths(
        n_rx: usize,
        n_tx: usize,
        gains: Vec<Complex64>,
        aoa_deg: Vec<f64>,
        aod_deg: Vec<f64>,
    ) -> Self {
        let mut h = ComplexMatrix::zeros(n_rx, n_tx);
        for ((g, phi_r), phi_t) in gains.iter().zip(&aoa_deg).zip(&aod_deg) {
            let ar = ula_response(n_rx, phi_r.to_radians());
            let at = ula_response(n_tx, phi_t.to_radians());
            h += &ar * at.adjoint() * *g;
        }
        ChannelRealization {
            h,
            gains,
            aoa_deg,
            aod_deg,
        }
    }

    pub fn n_rx(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.h.ncols()
    }
}

/// Generate a ground-truth channel: N_p rank-one terms with the
/// `sqrt(N_R*N_T/N_p)` gain normalization folded into the stored gains.
pub fn generate_channel<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    cfg.validate()?;
    let p = sample_path_params(cfg, rng);
    let scale = ((cfg.n_rx * cfg.n_tx) as f64 / cfg.n_paths as f64).sqrt();
    let gains = p.gains.iter().map(|g| g * scale).collect();
    Ok(ChannelRealization::from_paths(
        cfg.n_rx, cfg.n_tx, gains, p.aoa_deg, p.aod_deg,
    ))
}

/// Beamspace transform `Z = D_R^H * H * D_T`.
pub fn to_beamspace(
    h: &ComplexMatrix,
    d_r: &ComplexMatrix,
    d_t: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_beamspace_dims(h, d_r, d_t)?;
    Ok(d_r.adjoint() * h * d_t)
}

/// Inverse beamspace transform `H = D_R * Z * D_T^H`.
pub fn from_beamspace(
    z: &ComplexMatrix,
    d_r: &ComplexMatrix,
    d_t: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_beamspace_dims(z, d_r, d_t)?;
    Ok(d_r * z * d_t.adjoint())
}

fn check_beamspace_dims(
    h: &ComplexMatrix,
    d_r: &ComplexMatrix,
    d_t: &ComplexMatrix,
) -> Result<()> {
    if d_r.nrows() != d_r.ncols() || d_t.nrows() != d_t.ncols() {
        return Err(Error::DimensionMismatch(
            "beamspace dictionaries must be square".into(),
        ));
    }
    if h.nrows() != d_r.nrows() || h.ncols() != d_t.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "beamspace: {}x{} matrix vs {}x{} / {}x{} dictionaries",
            h.nrows(),
            h.ncols(),
            d_r.nrows(),
            d_r.ncols(),
            d_t.nrows(),
            d_t.ncols()
        )));
    }
    Ok(())
}

/// JSON-serializable channel realization for experiment records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_paths: usize,
    pub angle_spread_deg: f64,
    pub rng_seed: u64,
    /// Scaled gains as [re, im] pairs.
    pub gains: Vec<[f64; 2]>,
    pub aoa_deg: Vec<f64>,
    pub aod_deg: Vec<f64>,
}

impl ChannelRecord {
    pub fn new(cfg: &ChannelConfig, real: &ChannelRealization) -> Self {
        ChannelRecord {
            n_rx: real.n_rx(),
            n_tx: real.n_tx(),
            n_paths: real.gains.len(),
            angle_spread_deg: cfg.angle_spread_deg,
            rng_seed: cfg.rng_seed,
            gains: real.gains.iter().map(|g| [g.re, g.im]).collect(),
            aoa_deg: real.aoa_deg.clone(),
            aod_deg: real.aod_deg.clone(),
        }
    }

    /// Rebuild the realization from stored parameters.
    pub fn realize(&self) -> ChannelRealization {
        ChannelRealization::from_paths(
            self.n_rx,
            self.n_tx,
            self.gains
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect(),
            self.aoa_deg.clone(),
            self.aod_deg.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dft_matrix, svd};
    use crate::rng::trial_rng;

    fn cfg(n_rx: usize, n_tx: usize, n_paths: usize) -> ChannelConfig {
        ChannelConfig {
            n_rx,
            n_tx,
            n_paths,
            angle_spread_deg: 50.0,
            rng_seed: 0,
        }
    }

    fn numerical_rank(h: &ComplexMatrix) -> usize {
        let f = svd(h).unwrap();
        let smax = f.singular_values.first().copied().unwrap_or(0.0);
        f.singular_values
            .iter()
            .filter(|s| **s > 1e-9 * smax)
            .count()
    }

    #[test]
    fn ula_broadside_and_endfire() {
        let a = ula_response(2, 0.0);
        let s = 1.0 / 2f64.sqrt();
        assert!((a[0] - Complex64::new(s, 0.0)).norm() < 1e-14);
        assert!((a[1] - Complex64::new(s, 0.0)).norm() < 1e-14);

        // sin(pi/2) = 1: alternating signs, each entry 1/2.
        let a = ula_response(4, std::f64::consts::FRAC_PI_2);
        for (k, want) in [0.5, -0.5, 0.5, -0.5].iter().enumerate() {
            assert!((a[k] - Complex64::new(*want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ula_unit_norm() {
        let mut rng = trial_rng(3, 0, 0);
        for _ in 0..20 {
            let n = 1 + (rng.random::<u32>() % 64) as usize;
            let phi = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
            assert!((ula_response(n, phi).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn path_gain_power_and_angle_spread() {
        let c = cfg(4, 4, 1);
        let mut rng = trial_rng(4, 0, 0);
        let n = 100_000;
        let mut pow = 0.0;
        for _ in 0..n {
            let p = sample_path_params(&c, &mut rng);
            pow += p.gains[0].norm_sqr();
        }
        pow /= n as f64;
        assert!((pow - 0.5).abs() < 0.02, "E|alpha|^2 = {pow}");
        // The pre-wrap Laplace std is covered by rng::tests::laplace_std.
    }

    #[test]
    fn wrapping_into_half_open_interval() {
        assert_eq!(wrap_angle_deg(0.0), 0.0);
        assert_eq!(wrap_angle_deg(90.0), 90.0);
        assert_eq!(wrap_angle_deg(-90.0), 90.0);
        assert_eq!(wrap_angle_deg(91.0), -89.0);
        assert_eq!(wrap_angle_deg(271.0), -89.0);
        let mut rng = trial_rng(5, 0, 0);
        for _ in 0..1000 {
            let w = wrap_angle_deg((rng.random::<f64>() - 0.5) * 2000.0);
            assert!(w > -90.0 && w <= 90.0);
        }
    }

    #[test]
    fn fixed_seed_reproduces_draws() {
        let c = cfg(8, 8, 3);
        let p1 = sample_path_params(&c, &mut trial_rng(6, 0, 0));
        let p2 = sample_path_params(&c, &mut trial_rng(6, 0, 0));
        assert_eq!(p1.gains, p2.gains);
        assert_eq!(p1.aoa_deg, p2.aoa_deg);
        assert_eq!(p1.aod_deg, p2.aod_deg);
    }

    #[test]
    fn single_path_is_rank_one() {
        let real = generate_channel(&cfg(8, 8, 1), &mut trial_rng(7, 0, 0)).unwrap();
        assert_eq!(numerical_rank(&real.h), 1);
    }

    #[test]
    fn two_paths_rank_at_most_two() {
        let real = generate_channel(&cfg(64, 64, 2), &mut trial_rng(8, 0, 0)).unwrap();
        assert!(numerical_rank(&real.h) <= 2);
    }

    #[test]
    fn rank_bounded_by_path_count_over_seeds() {
        for seed in 0..100 {
            let c = cfg(16, 16, 4);
            let real = generate_channel(&c, &mut trial_rng(seed, 0, 0)).unwrap();
            assert!(numerical_rank(&real.h) <= 4, "seed {seed}");
        }
    }

    #[test]
    fn reconstruction_from_stored_params_is_exact() {
        let real = generate_channel(&cfg(16, 8, 3), &mut trial_rng(9, 0, 0)).unwrap();
        let rebuilt = ChannelRealization::from_paths(
            16,
            8,
            real.gains.clone(),
            real.aoa_deg.clone(),
            real.aod_deg.clone(),
        );
        assert!((rebuilt.h - &real.h).norm() < 1e-12);
    }

    /// Azimuth whose steering vector equals DFT column `k` exactly.
    fn grid_angle_deg(n: usize, k: usize) -> f64 {
        let mut s = -2.0 * (k as f64) / (n as f64);
        if s < -1.0 {
            s += 2.0;
        }
        s.asin().to_degrees()
    }

    #[test]
    fn on_grid_beam_is_single_entry() {
        let n = 8;
        let d = dft_matrix(n).unwrap();
        let real = ChannelRealization::from_paths(
            n,
            n,
            vec![Complex64::new(1.0, 0.0)],
            vec![grid_angle_deg(n, 2)],
            vec![grid_angle_deg(n, 5)],
        );
        let z = to_beamspace(&real.h, &d, &d).unwrap();
        assert!((z[(2, 5)].norm() - 1.0).abs() < 1e-10);
        let off: f64 = z
            .iter()
            .map(|v| v.norm())
            .sum::<f64>()
            - z[(2, 5)].norm();
        assert!(off < 1e-9);
    }

    #[test]
    fn on_grid_channel_has_n_paths_nonzeros() {
        let n = 16;
        let d = dft_matrix(n).unwrap();
        let real = ChannelRealization::from_paths(
            n,
            n,
            vec![Complex64::new(0.8, 0.1), Complex64::new(-0.2, 0.5), Complex64::new(0.3, -0.9)],
            vec![grid_angle_deg(n, 1), grid_angle_deg(n, 4), grid_angle_deg(n, 9)],
            vec![grid_angle_deg(n, 3), grid_angle_deg(n, 7), grid_angle_deg(n, 12)],
        );
        let z = to_beamspace(&real.h, &d, &d).unwrap();
        let nonzeros = z.iter().filter(|v| v.norm() > 1e-9).count();
        assert_eq!(nonzeros, 3);
    }

    #[test]
    fn beamspace_round_trip_and_energy() {
        let dr = dft_matrix(8).unwrap();
        let dt = dft_matrix(12).unwrap();
        let real = generate_channel(&cfg(8, 12, 2), &mut trial_rng(10, 0, 0)).unwrap();
        let z = to_beamspace(&real.h, &dr, &dt).unwrap();
        let back = from_beamspace(&z, &dr, &dt).unwrap();
        assert!((back - &real.h).norm() < 1e-12);
        assert!((z.norm() - real.h.norm()).abs() < 1e-12);

        let wrong = dft_matrix(9).unwrap();
        assert!(to_beamspace(&real.h, &wrong, &dt).is_err());
    }

    #[test]
    fn record_round_trip() {
        let c = cfg(8, 4, 2);
        let real = generate_channel(&c, &mut trial_rng(11, 0, 0)).unwrap();
        let rec = ChannelRecord::new(&c, &real);
        let json = serde_json::to_string(&rec).unwrap();
        let back: ChannelRecord = serde_json::from_str(&json).unwrap();
        assert!((back.realize().h - &real.h).norm() < 1e-12);
    }
}
