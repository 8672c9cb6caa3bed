//! Complex dense linear algebra primitives and proximal operators shared by
//! all solvers.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`, stored
//! column-major. Vectorization (`vec_columns`/`unvec`) follows the same
//! column-major convention so the Kronecker identity
//! `vec(B * S * A^T) = (A ⊗ B) * vec(S)` holds exactly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Thin SVD factors with singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// Left singular vectors, `m x r` with orthonormal columns.
    pub u: ComplexMatrix,
    /// Singular values, nonnegative and descending.
    pub singular_values: Vec<f64>,
    /// Right singular vectors, `n x r` with orthonormal columns.
    pub v: ComplexMatrix,
}

/// Frobenius, nuclear, entrywise-l1 and spectral norms of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixNorms {
    pub frobenius: f64,
    pub nuclear: f64,
    pub entrywise_l1: f64,
    pub spectral: f64,
}

/// The `n x n` normalized DFT matrix with `[D]_{jk} = exp(-2*pi*i*j*k/n)/sqrt(n)`.
///
/// Unitary: `D^H * D = I`.
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "DFT matrix requires n >= 1".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |j, k| {
        let phase = -2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / (n as f64);
        Complex64::from_polar(scale, phase)
    }))
}

/// Kronecker product, dims `(m1*m2) x (n1*n2)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Elementwise (Hadamard) product.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "hadamard: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.component_mul(b))
}

/// Stack the columns of `a` into one column vector.
pub fn vec_columns(a: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec_columns`]: reshape a length `rows*cols` vector into a
/// matrix, column by column.
pub fn unvec(v: &ComplexVector, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "unvec: vector length {} != {} x {}",
            v.len(),
            rows,
            cols
        )));
    }
    Ok(ComplexMatrix::from_column_slice(rows, cols, v.as_slice()))
}

// Jacobi sweep cap; typical dense inputs converge in 10-20 sweeps.
const SVD_MAX_SWEEPS: usize = 64;

/// Thin SVD with descending singular values.
pub fn svd(a: &ComplexMatrix) -> Result<SvdFactors> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("svd: input has non-finite entries".into()));
    }
    let f = crate::jacobi_svd::jacobi_svd(a, SVD_MAX_SWEEPS).map_err(|e| {
        Error::Numerical(format!(
            "{e} (||A||_F = {:.3e}, shape {}x{})",
            a.norm(),
            a.nrows(),
            a.ncols()
        ))
    })?;
    Ok(SvdFactors {
        u: f.u,
        singular_values: f.sigma,
        v: f.v,
    })
}

/// Singular value thresholding: `U * diag(max(sigma_i - threshold, 0)) * V^H`.
///
/// This is the proximal operator of the nuclear norm: the unique minimizer of
/// `threshold * ||X||_* + 1/2 * ||X - W||_F^2`.
pub fn svt_shrink(w: &ComplexMatrix, threshold: f64) -> Result<ComplexMatrix> {
    if threshold < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "svt_shrink: negative threshold {threshold}"
        )));
    }
    let f = svd(w)?;
    let r = f.singular_values.len();
    let mut out = ComplexMatrix::zeros(w.nrows(), w.ncols());
    for i in 0..r {
        let s = (f.singular_values[i] - threshold).max(0.0);
        if s == 0.0 {
            // Descending order: everything after is shrunk to zero too.
            break;
        }
        let ui = f.u.column(i);
        let vi = f.v.column(i);
        for c in 0..w.ncols() {
            let vc = vi[c].conj() * s;
            for rr in 0..w.nrows() {
                out[(rr, c)] += ui[rr] * vc;
            }
        }
    }
    Ok(out)
}

/// Soft threshold of a complex scalar with real and imaginary parts shrunk
/// independently.
#[inline]
pub fn soft_threshold_scalar(z: Complex64, tau: f64) -> Complex64 {
    let shrink = |x: f64| x.signum() * (x.abs() - tau).max(0.0);
    Complex64::new(shrink(z.re), shrink(z.im))
}

/// Componentwise complex soft threshold: the minimizer of
/// `tau * (|Re s| + |Im s|) + 1/2 * |s - v|^2` per component.
pub fn soft_threshold_complex(v: &ComplexVector, tau_prime: f64) -> ComplexVector {
    v.map(|z| soft_threshold_scalar(z, tau_prime))
}

/// All four norms of the spec in one pass (one SVD).
pub fn norms(a: &ComplexMatrix) -> Result<MatrixNorms> {
    let f = svd(a)?;
    Ok(MatrixNorms {
        frobenius: a.norm(),
        nuclear: f.singular_values.iter().sum(),
        entrywise_l1: a.iter().map(|z| z.norm()).sum(),
        spectral: f.singular_values.first().copied().unwrap_or(0.0),
    })
}

/// Singular values only (descending).
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    crate::jacobi_svd::jacobi_svd(a, SVD_MAX_SWEEPS).map(|f| f.sigma)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Sum of singular values.
pub fn nuclear_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// Entrywise l1 norm `sum_ij |a_ij|` (complex modulus).
pub fn entrywise_l1(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).sum()
}
