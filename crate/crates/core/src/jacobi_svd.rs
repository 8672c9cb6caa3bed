//! One-sided Jacobi SVD for complex dense matrices.
//!
//! Hestenes' method: unitary 2x2 rotations orthogonalize column pairs of a
//! working copy `W = A * V` until every pair is numerically orthogonal. Then
//! the column norms are the singular values and `U = W * diag(1/sigma)`.
//! Jacobi iteration is slower than bidiagonalization but delivers high
//! relative accuracy and, unlike the generic SVD of our linear algebra
//! backend, is dependable on exactly rank-deficient inputs (outer products,
//! thresholded iterates), which the shrinkage operators here produce all the
//! time.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type CMat = DMatrix<Complex64>;

pub(crate) struct JacobiSvd {
    pub u: CMat,
    /// Descending, nonnegative.
    pub sigma: Vec<f64>,
    pub v: CMat,
}

// Rotation threshold relative to the column magnitudes involved.
const PAIR_TOL: f64 = 1e-15;

/// Apply the unitary pair rotation to columns `p` and `q` of a column-major
/// buffer with `rows` rows.
#[inline]
#[allow(clippy::too_many_arguments)]
fn rotate_pair(
    data: &mut [Complex64],
    rows: usize,
    p: usize,
    q: usize,
    cos: f64,
    sin: f64,
    phase: Complex64,
    phase_conj: Complex64,
) {
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let (head, tail) = data.split_at_mut(hi * rows);
    let cl = &mut head[lo * rows..lo * rows + rows];
    let ch = &mut tail[..rows];
    let (cp, cq) = if p < q { (cl, ch) } else { (ch, cl) };
    let ps = phase * sin;
    let pcs = phase_conj * sin;
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let wp = *a;
        let wq = *b;
        *a = wp * cos - wq * pcs;
        *b = wp * ps + wq * cos;
    }
}

/// Thin SVD, `a = u * diag(sigma) * v^H`, with `u` (m x k) and `v` (n x k)
/// orthonormal for `k = min(m, n)`.
pub(crate) fn jacobi_svd(a: &CMat, max_sweeps: usize) -> Result<JacobiSvd> {
    if a.nrows() < a.ncols() {
        // Work on the adjoint and swap the factor roles.
        let t = jacobi_svd(&a.adjoint(), max_sweeps)?;
        return Ok(JacobiSvd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let (m, n) = (a.nrows(), a.ncols());
    let mut w = a.clone();
    let mut v = CMat::identity(n, n);
    // Rotations preserve the total Frobenius norm; columns below the machine
    // noise floor of that total are numerically zero and must not keep the
    // sweep loop alive.
    let noise_floor_sq = a.norm_squared() * f64::EPSILON * f64::EPSILON;

    let mut converged = false;
    for _ in 0..max_sweeps {
        // Refresh column norms each sweep; the incremental updates below
        // drift over many rotations.
        let mut col_sq: Vec<f64> = (0..n).map(|j| w.column(j).norm_squared()).collect();
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let app = col_sq[p];
                let aqq = col_sq[q];
                if app <= noise_floor_sq || aqq <= noise_floor_sq {
                    continue;
                }
                // Columns are contiguous (column-major storage).
                let g: Complex64 = {
                    let data = w.as_slice();
                    let cp = &data[p * m..(p + 1) * m];
                    let cq = &data[q * m..(q + 1) * m];
                    cp.iter().zip(cq).map(|(a, b)| a.conj() * b).sum()
                };
                let mag = g.norm();
                if mag <= PAIR_TOL * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                // Phase-align column q, then a real Jacobi rotation on the
                // 2x2 Gram block [[app, |g|], [|g|, aqq]].
                let phase = g / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = cos * t;
                let phase_conj = phase.conj();
                rotate_pair(w.as_mut_slice(), m, p, q, cos, sin, phase, phase_conj);
                rotate_pair(v.as_mut_slice(), n, p, q, cos, sin, phase, phase_conj);
                col_sq[p] = (app * cos * cos - 2.0 * cos * sin * mag + aqq * sin * sin).max(0.0);
                col_sq[q] = app * sin * sin + 2.0 * cos * sin * mag + aqq * cos * cos;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "jacobi svd did not converge within {max_sweeps} sweeps on a {m}x{n} matrix"
        )));
    }

    // Singular values and descending order.
    let mut order: Vec<usize> = (0..n).collect();
    let sigmas: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&i, &j| sigmas[j].partial_cmp(&sigmas[i]).unwrap());

    let mut u = CMat::zeros(m, n);
    let mut v_sorted = CMat::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    let sigma_max = order.first().map(|&j| sigmas[j]).unwrap_or(0.0);
    let zero_tol = sigma_max * (m.max(n) as f64) * f64::EPSILON;
    for (slot, &j) in order.iter().enumerate() {
        sigma.push(sigmas[j]);
        v_sorted.set_column(slot, &v.column(j));
        if sigmas[j] > zero_tol && sigmas[j] > 0.0 {
            let scale = Complex64::new(1.0 / sigmas[j], 0.0);
            for r in 0..m {
                u[(r, slot)] = w[(r, j)] * scale;
            }
        }
    }
    // Zero-sigma slots still need orthonormal U columns: Gram-Schmidt
    // canonical vectors against what is already there.
    for slot in 0..n {
        if u.column(slot).norm() > 0.5 {
            continue;
        }
        'candidates: for cand in 0..m {
            let mut col = nalgebra::DVector::<Complex64>::zeros(m);
            col[cand] = Complex64::new(1.0, 0.0);
            for k in 0..n {
                if k == slot || u.column(k).norm() < 0.5 {
                    continue;
                }
                let proj: Complex64 = (0..m).map(|r| u[(r, k)].conj() * col[r]).sum();
                for r in 0..m {
                    let correction = u[(r, k)] * proj;
                    col[r] -= correction;
                }
            }
            let norm = col.norm();
            if norm > 1e-3 {
                col /= Complex64::new(norm, 0.0);
                u.set_column(slot, &col);
                break 'candidates;
            }
        }
    }

    Ok(JacobiSvd { u, sigma, v: v_sorted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> CMat {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        CMat::from_fn(m, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn check_factors(a: &CMat, f: &JacobiSvd, tol: f64) {
        let k = f.sigma.len();
        let sig = CMat::from_fn(k, k, |i, j| {
            if i == j {
                Complex64::new(f.sigma[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let rec = &f.u * &sig * f.v.adjoint();
        assert!(
            (rec - a).norm() <= tol * a.norm().max(1.0),
            "reconstruction failed"
        );
        let eye = CMat::identity(k, k);
        assert!((f.u.adjoint() * &f.u - &eye).norm() < 1e-12);
        assert!((f.v.adjoint() * &f.v - &eye).norm() < 1e-12);
        for w in f.sigma.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn exact_rank_one_outer_products() {
        for seed in 0..50 {
            let mut u = random_matrix(6, 1, seed);
            let mut v = random_matrix(4, 1, seed + 1000);
            u /= Complex64::new(u.norm(), 0.0);
            v /= Complex64::new(v.norm(), 0.0);
            let a = &u * v.adjoint();
            let f = jacobi_svd(&a, 60).unwrap();
            assert!(
                (f.sigma[0] - 1.0).abs() < 1e-12,
                "seed {seed}: sigma {:?}",
                &f.sigma[..2]
            );
            for s in &f.sigma[1..] {
                assert!(*s < 1e-12);
            }
            check_factors(&a, &f, 1e-12);
        }
    }

    #[test]
    fn dense_random_rectangular() {
        for (m, n, seed) in [(6, 4, 1u64), (4, 6, 2), (16, 16, 3), (40, 24, 4)] {
            let a = random_matrix(m, n, seed);
            let f = jacobi_svd(&a, 60).unwrap();
            assert_eq!(f.sigma.len(), m.min(n));
            check_factors(&a, &f, 1e-12);
        }
    }

    #[test]
    fn zero_and_diagonal_matrices() {
        let z = CMat::zeros(5, 3);
        let f = jacobi_svd(&z, 60).unwrap();
        assert!(f.sigma.iter().all(|s| *s == 0.0));
        check_factors(&z, &f, 1e-14);

        let d = CMat::from_fn(3, 3, |i, j| {
            if i == j {
                Complex64::new([5.0, 3.0, 1.0][i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let f = jacobi_svd(&d, 60).unwrap();
        assert!((f.sigma[0] - 5.0).abs() < 1e-13);
        assert!((f.sigma[1] - 3.0).abs() < 1e-13);
        assert!((f.sigma[2] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn thresholded_low_rank_inputs() {
        // Sum of two outer products plus a tiny perturbation, the shape the
        // shrinkage operators feed back in.
        for seed in 0..20 {
            let u1 = random_matrix(12, 1, seed);
            let v1 = random_matrix(8, 1, seed + 50);
            let u2 = random_matrix(12, 1, seed + 100);
            let v2 = random_matrix(8, 1, seed + 150);
            let a = &u1 * v1.adjoint() + &u2 * v2.adjoint() * Complex64::new(0.3, 0.0);
            let f = jacobi_svd(&a, 60).unwrap();
            check_factors(&a, &f, 1e-12);
            for s in &f.sigma[2..] {
                assert!(*s < 1e-12 * f.sigma[0]);
            }
        }
    }
}
