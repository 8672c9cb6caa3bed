//! Reference estimators: plain singular-value-thresholding completion and
//! beamspace orthogonal matching pursuit.
//!
//! Both consume the same masked-entry observations as the joint solver, so
//! comparisons isolate the algorithms rather than the training protocol.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::admm::SolverTrace;
use crate::error::{Error, Result};
use crate::linalg::{hadamard, nuclear_norm, spectral_norm, svt_shrink, ComplexMatrix};
use crate::metrics;
use crate::sampling::ObservedChannel;

/// Plain SVT matrix-completion parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvtConfig {
    /// Shrinkage threshold tau.
    pub tau: f64,
    /// Gradient stepsize on the masked residual.
    pub step: f64,
    pub max_iters: usize,
}

impl SvtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "svt tau must be > 0, got {}",
                self.tau
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "svt step must be > 0, got {}",
                self.step
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("svt max_iters must be >= 1".into()));
        }
        Ok(())
    }

    /// Default rule: `tau = (3M/(N_R*N_T)) * ||H_omega||_2` with the
    /// recommended completion stepsize `1.2*N_R*N_T/M`, capped at 2 where
    /// that recommendation leaves the iteration's stability range (it
    /// diverges on noisy low-sampling-ratio instances otherwise).
    pub fn default_for(observed: &ObservedChannel, max_iters: usize) -> Result<SvtConfig> {
        let m = observed.pattern.m();
        if m == 0 {
            return Err(Error::InvalidParameter(
                "svt defaults undefined for an empty sampling pattern".into(),
            ));
        }
        let total = (observed.n_rx() * observed.n_tx()) as f64;
        let tau = (3.0 * m as f64 / total) * spectral_norm(&observed.h_omega)?;
        let step = (1.2 * total / m as f64).min(2.0);
        Ok(SvtConfig {
            tau,
            step,
            max_iters,
        })
    }
}

// Consecutive masked-residual increases tolerated before declaring
// divergence.
const SVT_DIVERGENCE_RUN: usize = 10;

/// SVT iteration with per-iteration trace:
/// `Z_0 = 0; H_k = svt_shrink(Z_k, tau); Z_{k+1} = Z_k + step * mask.*(H_omega - H_k)`.
///
/// Aborts with a diagnostic when the masked residual grows for 10
/// consecutive iterations. The trace records the masked data residual as
/// `primal_residual_1` (the second residual slot stays at zero) and the fit
/// objective `tau*||H||_* + 1/2*||mask.*(H - H_omega)||_F^2`.
pub fn solve_svt_traced(
    observed: &ObservedChannel,
    cfg: &SvtConfig,
    truth: Option<&ComplexMatrix>,
) -> Result<(ComplexMatrix, SolverTrace)> {
    cfg.validate()?;
    let (nr, nt) = (observed.n_rx(), observed.n_tx());
    let mask = &observed.pattern.mask;
    let mut z = ComplexMatrix::zeros(nr, nt);
    let mut h = ComplexMatrix::zeros(nr, nt);
    let mut trace = SolverTrace {
        nmse_db: truth.map(|_| Vec::new()),
        ..SolverTrace::default()
    };
    let mut prev_res = f64::INFINITY;
    let mut growth_run = 0usize;

    for iter in 0..cfg.max_iters {
        h = svt_shrink(&z, cfg.tau)
            .map_err(|e| Error::Numerical(format!("svt iteration {}: {e}", iter + 1)))?;
        let masked_err = hadamard(mask, &(&observed.h_omega - &h))?;
        let res = masked_err.norm();
        z += masked_err * Complex64::new(cfg.step, 0.0);

        trace.primal_residual_1.push(res);
        trace.primal_residual_2.push(0.0);
        trace
            .objective
            .push(cfg.tau * nuclear_norm(&h)? + 0.5 * res * res);
        if let (Some(log), Some(t)) = (trace.nmse_db.as_mut(), truth) {
            let (_, db) = metrics::nmse(&h, t)?;
            log.push(db);
        }

        if res > prev_res {
            growth_run += 1;
            if growth_run >= SVT_DIVERGENCE_RUN {
                return Err(Error::Numerical(format!(
                    "svt diverged: masked residual grew for {SVT_DIVERGENCE_RUN} consecutive \
                     iterations (iteration {}, residual {res:.3e}, tau {:.3e}, step {})",
                    iter + 1,
                    cfg.tau,
                    cfg.step
                )));
            }
        } else {
            growth_run = 0;
        }
        prev_res = res;
    }
    Ok((h, trace))
}

/// Low-rank completion estimate using only the low-rank property.
pub fn solve_svt(observed: &ObservedChannel, cfg: &SvtConfig) -> Result<ComplexMatrix> {
    solve_svt_traced(observed, cfg, None).map(|(h, _)| h)
}

/// OMP parameters: number of atoms (the path-count proxy) and an optional
/// residual stop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmpConfig {
    pub sparsity: usize,
    pub residual_tol: f64,
}

impl OmpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sparsity == 0 {
            return Err(Error::InvalidParameter("omp sparsity must be >= 1".into()));
        }
        if self.residual_tol < 0.0 {
            return Err(Error::InvalidParameter("omp residual_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// Greedy sparse recovery over the beamspace dictionary restricted to the
/// sampled entries.
///
/// The dictionary is `B = conj(D_T) (x) D_R` rowed by the support, but it is
/// never materialized: correlations `B^H vec(R)` equal
/// `vec(D_R^H * R * D_T)` for the support-embedded residual `R`, and each
/// selected atom's antenna-domain column is the rank-one matrix
/// `D_R[:,p] * D_T[:,q]^H`. The least-squares refit over the selected atoms
/// runs every iteration, leaving the residual orthogonal to them.
pub fn solve_omp(
    observed: &ObservedChannel,
    d_r: &ComplexMatrix,
    d_t: &ComplexMatrix,
    cfg: &OmpConfig,
) -> Result<ComplexMatrix> {
    cfg.validate()?;
    let support = &observed.pattern.support;
    let m = support.len();
    if cfg.sparsity > m {
        return Err(Error::InvalidArgument(format!(
            "omp sparsity {} exceeds the {} sampled entries (underdetermined refit)",
            cfg.sparsity, m
        )));
    }
    let (nr, nt) = (observed.n_rx(), observed.n_tx());
    if d_r.nrows() != nr || d_r.ncols() != nr || d_t.nrows() != nt || d_t.ncols() != nt {
        return Err(Error::DimensionMismatch(
            "omp dictionaries do not match the observation".into(),
        ));
    }

    // Measurements in training order.
    let y: Vec<Complex64> = support.iter().map(|&(i, j)| observed.h_omega[(i, j)]).collect();
    // Support-restricted atom columns, one per selected (p, q).
    let atom_column = |p: usize, q: usize| -> Vec<Complex64> {
        support
            .iter()
            .map(|&(i, j)| d_r[(i, p)] * d_t[(j, q)].conj())
            .collect()
    };

    let mut residual_embedded = ComplexMatrix::zeros(nr, nt);
    for (t, &(i, j)) in support.iter().enumerate() {
        residual_embedded[(i, j)] = y[t];
    }
    let mut selected: Vec<(usize, usize)> = Vec::new();
    let mut phi: Vec<Vec<Complex64>> = Vec::new();
    let mut coeffs: Vec<Complex64> = Vec::new();

    for _ in 0..cfg.sparsity {
        let corr = d_r.adjoint() * &residual_embedded * d_t;
        let mut best = (0.0f64, (0usize, 0usize));
        for q in 0..nt {
            for p in 0..nr {
                if selected.contains(&(p, q)) {
                    continue;
                }
                let mag = corr[(p, q)].norm();
                if mag > best.0 {
                    best = (mag, (p, q));
                }
            }
        }
        selected.push(best.1);
        phi.push(atom_column(best.1 .0, best.1 .1));

        // Least-squares refit on the selected set via the normal equations.
        let k = phi.len();
        let mut gram = ComplexMatrix::zeros(k, k);
        let mut rhs = nalgebra::DVector::<Complex64>::zeros(k);
        for a in 0..k {
            for b in 0..k {
                gram[(a, b)] = phi[a]
                    .iter()
                    .zip(&phi[b])
                    .map(|(x, w)| x.conj() * w)
                    .sum();
            }
            rhs[a] = phi[a].iter().zip(&y).map(|(x, w)| x.conj() * w).sum();
        }
        let sol = gram.lu().solve(&rhs).ok_or_else(|| {
            Error::Numerical("omp: singular normal equations in the refit".into())
        })?;
        coeffs = sol.iter().copied().collect();

        // Residual embedded back into the matrix for the next correlation.
        residual_embedded.fill(Complex64::new(0.0, 0.0));
        for (t, &(i, j)) in support.iter().enumerate() {
            let mut fit = Complex64::new(0.0, 0.0);
            for (a, col) in phi.iter().enumerate() {
                fit += coeffs[a] * col[t];
            }
            residual_embedded[(i, j)] = y[t] - fit;
        }
        if residual_embedded.norm() <= cfg.residual_tol {
            break;
        }
    }

    // Sparse beamspace estimate back to the antenna domain.
    let mut z = ComplexMatrix::zeros(nr, nt);
    for (a, &(p, q)) in selected.iter().enumerate() {
        z[(p, q)] = coeffs[a];
    }
    Ok(d_r * z * d_t.adjoint())
}
