//! Joint low-rank + beamspace-sparse channel completion via ADMM.
//!
//! The estimate minimizes
//!
//! ```text
//! tau_h*||H||_* + tau_s*||S||_1 + 1/2*||C||_F^2 + 1/2*||mask .* Y - H_omega||_F^2
//!     subject to  H = Y,  C = Y - D_R * S * D_T^H
//! ```
//!
//! over six iterated blocks: a singular-value-thresholding step for `H`, an
//! elementwise data-fusion step for `Y`, a componentwise complex soft
//! threshold in beamspace for `S`, a closed-form ridge step for `C`, and two
//! dual ascent steps. Every block is the exact minimizer of the augmented
//! Lagrangian, so the iteration inherits standard ADMM convergence.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    entrywise_l1, hadamard, nuclear_norm, soft_threshold_complex, spectral_norm, svt_shrink,
    unvec, vec_columns, ComplexMatrix,
};
use crate::metrics;
use crate::sampling::ObservedChannel;

/// Which norm of `H_omega` feeds the `tau_h = rho * ||H_omega||` rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TauNorm {
    #[default]
    Spectral,
    Frobenius,
}

impl std::str::FromStr for TauNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spectral" => Ok(TauNorm::Spectral),
            "frobenius" => Ok(TauNorm::Frobenius),
            other => Err(Error::Config(format!(
                "unknown tau norm '{other}' (expected spectral|frobenius)"
            ))),
        }
    }
}

/// Solver parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmmConfig {
    /// ADMM stepsize rho.
    pub rho: f64,
    /// Nuclear-norm weight.
    pub tau_h: f64,
    /// Beamspace l1 weight.
    pub tau_s: f64,
    /// Iteration budget.
    pub max_iters: usize,
    /// Early-stop threshold on both primal residuals; 0 disables early
    /// stopping and reproduces the fixed-iteration schedule.
    pub residual_tol: f64,
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rho must be > 0, got {}",
                self.rho
            )));
        }
        if !(self.tau_h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_h must be > 0, got {}",
                self.tau_h
            )));
        }
        if !(self.tau_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_s must be > 0, got {}",
                self.tau_s
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if self.residual_tol < 0.0 {
            return Err(Error::InvalidParameter("residual_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// The six iterate matrices. All start at zero.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub h: ComplexMatrix,
    pub y: ComplexMatrix,
    pub s: ComplexMatrix,
    pub c: ComplexMatrix,
    pub z1: ComplexMatrix,
    pub z2: ComplexMatrix,
    pub iteration: usize,
}

impl AdmmState {
    pub fn zeros(n_rx: usize, n_tx: usize) -> Self {
        AdmmState {
            h: ComplexMatrix::zeros(n_rx, n_tx),
            y: ComplexMatrix::zeros(n_rx, n_tx),
            s: ComplexMatrix::zeros(n_rx, n_tx),
            c: ComplexMatrix::zeros(n_rx, n_tx),
            z1: ComplexMatrix::zeros(n_rx, n_tx),
            z2: ComplexMatrix::zeros(n_rx, n_tx),
            iteration: 0,
        }
    }
}

/// Per-iteration convergence history.
#[derive(Debug, Clone, Default)]
pub struct SolverTrace {
    /// `||H - Y||_F` after each iteration.
    pub primal_residual_1: Vec<f64>,
    /// `||Y - D_R*S*D_T^H - C||_F` after each iteration.
    pub primal_residual_2: Vec<f64>,
    /// Objective value at the iterate.
    pub objective: Vec<f64>,
    /// NMSE against ground truth in dB, when truth was supplied.
    pub nmse_db: Option<Vec<f64>>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.primal_residual_1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV export: `iter,res1,res2,objective,nmse_db` with the nmse column
    /// left empty when no truth was supplied.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "iter,res1,res2,objective,nmse_db")?;
        for i in 0..self.len() {
            let nmse = match &self.nmse_db {
                Some(v) => crate::harness::format_g6(v[i]),
                None => String::new(),
            };
            writeln!(
                w,
                "{},{},{},{},{}",
                i + 1,
                crate::harness::format_g6(self.primal_residual_1[i]),
                crate::harness::format_g6(self.primal_residual_2[i]),
                crate::harness::format_g6(self.objective[i]),
                nmse
            )?;
        }
        Ok(())
    }
}

/// H block: `svt_shrink(Y - Z1/rho, tau_h/rho)`.
pub fn update_h(state: &AdmmState, cfg: &AdmmConfig) -> Result<ComplexMatrix> {
    let arg = &state.y - &state.z1 / Complex64::new(cfg.rho, 0.0);
    svt_shrink(&arg, cfg.tau_h / cfg.rho)
}

/// Y block, solved elementwise.
///
/// The vectorized data-selection operator is a 0/1 diagonal matrix, so the
/// normal equations decouple per entry: numerator
/// `Z1 + rho*H + H_omega - Z2 + rho*C + rho*D_R*S*D_T^H`, divided by
/// `1 + 2*rho` on the support and `2*rho` elsewhere. `Z2` enters negated
/// because its Lagrangian term couples as `+tr(Z2^H (Y - D_R*S*D_T^H - C))`.
/// `s_synth` is the precomputed `D_R * S * D_T^H` for the current `S`.
pub fn update_y(
    state: &AdmmState,
    observed: &ObservedChannel,
    cfg: &AdmmConfig,
    s_synth: &ComplexMatrix,
) -> ComplexMatrix {
    let rho = Complex64::new(cfg.rho, 0.0);
    let numer = &state.z1 + &state.h * rho + &observed.h_omega - &state.z2
        + &state.c * rho
        + s_synth * rho;
    let on = 1.0 + 2.0 * cfg.rho;
    let off = 2.0 * cfg.rho;
    let mask = &observed.pattern.mask;
    ComplexMatrix::from_fn(numer.nrows(), numer.ncols(), |i, j| {
        let d = if mask[(i, j)].re > 0.5 { on } else { off };
        numer[(i, j)] / d
    })
}

/// S block: `V = D_R^H * (Z2/rho - C + Y) * D_T`, then a componentwise
/// complex soft threshold with `tau_s/rho` (the LASSO prox in beamspace).
pub fn update_s(
    state: &AdmmState,
    cfg: &AdmmConfig,
    d_r: &ComplexMatrix,
    d_t: &ComplexMatrix,
) -> ComplexMatrix {
    let v = d_r.adjoint() * (&state.z2 / Complex64::new(cfg.rho, 0.0) - &state.c + &state.y) * d_t;
    let shrunk = soft_threshold_complex(&vec_columns(&v), cfg.tau_s / cfg.rho);
    unvec(&shrunk, v.nrows(), v.ncols()).expect("shape preserved")
}

/// C block: `rho/(rho+1) * (Y - D_R*S*D_T^H + Z2/rho)`.
pub fn update_c(state: &AdmmState, cfg: &AdmmConfig, s_synth: &ComplexMatrix) -> ComplexMatrix {
    let scale = Complex64::new(cfg.rho / (cfg.rho + 1.0), 0.0);
    (&state.y - s_synth + &state.z2 / Complex64::new(cfg.rho, 0.0)) * scale
}

/// Dual ascent: `Z1 += rho*(H - Y)`, `Z2 += rho*(Y - D_R*S*D_T^H - C)`,
/// evaluated at the just-updated iterates.
pub fn update_duals(
    state: &AdmmState,
    cfg: &AdmmConfig,
    s_synth: &ComplexMatrix,
) -> (ComplexMatrix, ComplexMatrix) {
    let rho = Complex64::new(cfg.rho, 0.0);
    let z1 = &state.z1 + (&state.h - &state.y) * rho;
    let z2 = &state.z2 + (&state.y - s_synth - &state.c) * rho;
    (z1, z2)
}

/// Objective of the split problem at the current iterate.
pub fn objective(state: &AdmmState, observed: &ObservedChannel, cfg: &AdmmConfig) -> Result<f64> {
    let data = hadamard(&observed.pattern.mask, &state.y)? - &observed.h_omega;
    Ok(cfg.tau_h * nuclear_norm(&state.h)?
        + cfg.tau_s * entrywise_l1(&state.s)
        + 0.5 * state.c.norm_squared()
        + 0.5 * data.norm_squared())
}

/// Full iteration from all-zero initialization, returning the final state.
///
/// Updates run in the order H, Y, S, C, Z1, Z2 for up to `max_iters`
/// iterations; when `residual_tol > 0` the loop stops early once both primal
/// residuals fall below it.
pub fn run(
    observed: &ObservedChannel,
    d_r: &ComplexMatrix,
    d_t: &ComplexMatrix,
    cfg: &AdmmConfig,
    truth: Option<&ComplexMatrix>,
) -> Result<(AdmmState, SolverTrace)> {
    cfg.validate()?;
    let (n_rx, n_tx) = (observed.n_rx(), observed.n_tx());
    if d_r.nrows() != n_rx || d_r.ncols() != n_rx || d_t.nrows() != n_tx || d_t.ncols() != n_tx {
        return Err(Error::DimensionMismatch(format!(
            "dictionaries {}x{} / {}x{} vs observation {}x{}",
            d_r.nrows(),
            d_r.ncols(),
            d_t.nrows(),
            d_t.ncols(),
            n_rx,
            n_tx
        )));
    }

    let mut state = AdmmState::zeros(n_rx, n_tx);
    let mut trace = SolverTrace {
        nmse_db: truth.map(|_| Vec::new()),
        ..SolverTrace::default()
    };
    // D_R * S * D_T^H for the current S; refreshed after each S update.
    let mut s_synth = ComplexMatrix::zeros(n_rx, n_tx);

    for iter in 0..cfg.max_iters {
        state.h = update_h(&state, cfg)
            .map_err(|e| Error::Numerical(format!("iteration {}: {e}", iter + 1)))?;
        state.y = update_y(&state, observed, cfg, &s_synth);
        state.s = update_s(&state, cfg, d_r, d_t);
        s_synth = d_r * &state.s * d_t.adjoint();
        state.c = update_c(&state, cfg, &s_synth);
        let (z1, z2) = update_duals(&state, cfg, &s_synth);
        state.z1 = z1;
        state.z2 = z2;
        state.iteration = iter + 1;

        let r1 = (&state.h - &state.y).norm();
        let r2 = (&state.y - &s_synth - &state.c).norm();
        trace.primal_residual_1.push(r1);
        trace.primal_residual_2.push(r2);
        trace.objective.push(
            objective(&state, observed, cfg)
                .map_err(|e| Error::Numerical(format!("iteration {}: {e}", iter + 1)))?,
        );
        if let (Some(nmse_log), Some(t)) = (trace.nmse_db.as_mut(), truth) {
            let (_, db) = metrics::nmse(&state.h, t)?;
            nmse_log.push(db);
        }

        if cfg.residual_tol > 0.0 && r1 < cfg.residual_tol && r2 < cfg.residual_tol {
            break;
        }
    }

    Ok((state, trace))
}

/// Run the iteration and return the channel estimate `H` with the trace.
pub fn solve(
    observed: &ObservedChannel,
    d_r: &ComplexMatrix,
    d_t: &ComplexMatrix,
    cfg: &AdmmConfig,
    truth: Option<&ComplexMatrix>,
) -> Result<(ComplexMatrix, SolverTrace)> {
    let (state, trace) = run(observed, d_r, d_t, cfg, truth)?;
    Ok((state.h, trace))
}

// Noise floor standing in for sigma_n^2 = 0 in the tau_s rule; the rule's
// log10 is undefined at zero and its noiseless limit is tau_s -> 0+.
const NOISELESS_SIGMA_FLOOR: f64 = f64::MIN_POSITIVE;

/// Default parameter rule: `rho = 0.005`, `tau_h = rho * ||H_omega||`,
/// `tau_s = 0.1 / (1 - 10*log10(sigma_n^2))`.
///
/// Returns `(tau_h, tau_s, rho)`. The caller assembles an [`AdmmConfig`]
/// (whose validation rejects the degenerate `tau_h = 0` of an all-zero
/// observation). Errors when the `tau_s` denominator is not positive, which
/// happens only for `sigma_n^2 >= 10^0.1`.
pub fn default_params(observed: &ObservedChannel, tau_norm: TauNorm) -> Result<(f64, f64, f64)> {
    let rho = 0.005;
    let norm = match tau_norm {
        TauNorm::Spectral => spectral_norm(&observed.h_omega)?,
        TauNorm::Frobenius => observed.h_omega.norm(),
    };
    let tau_h = rho * norm;
    let sigma = observed.noise_var.max(NOISELESS_SIGMA_FLOOR);
    let denom = 1.0 - 10.0 * sigma.log10();
    if denom <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tau_s rule undefined: 1 - 10*log10(sigma_n^2) = {denom} <= 0 (sigma_n^2 = {})",
            observed.noise_var
        )));
    }
    Ok((tau_h, 0.1 / denom, rho))
}
