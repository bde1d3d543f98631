//! Functions of Hermitian positive definite matrices.

use alloc::format;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{svd, CMatrix, C64};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.rows();
    let scale = a.max_abs().max(1.0);
    (0..n).all(|i| (0..=i).all(|j| (a[(i, j)] - a[(j, i)].conj()).norm() <= tol * scale))
}

/// `a^p` for Hermitian positive definite `a`.
///
/// For such matrices the SVD is an eigendecomposition with `u = v`, so
/// `a^p = v diag(σ^p) v*`.
pub fn hermitian_power(a: &CMatrix, p: f64) -> Result<CMatrix> {
    if a.is_empty() {
        return Err(Error::EmptyInput("matrix"));
    }
    if !is_hermitian(a, HERMITIAN_TOL) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = svd(a)?;
    let n = a.rows();
    // Positive definite iff every left/right singular pair agrees (u_i = v_i),
    // which fails exactly for negative eigenvalues, and σ_min > 0.
    let smin = d.sigma[n - 1];
    if !(smin > HERMITIAN_TOL * d.sigma[0]) {
        return Err(Error::NotPositiveDefinite);
    }
    for k in 0..n {
        let dot: C64 = (0..n).map(|i| d.u[(i, k)].conj() * d.v[(i, k)]).sum();
        if dot.re < 0.5 {
            return Err(Error::NotPositiveDefinite);
        }
    }
    let w: alloc::vec::Vec<f64> = d.sigma.iter().map(|s| s.powf(p)).collect();
    Ok(CMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| d.v[(i, k)] * w[k] * d.v[(j, k)].conj()).sum()
    }))
}

/// Hermitian part `(a + a*) / 2`, used to remove rounding asymmetry.
pub fn hermitian_part(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Shape(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    Ok(a.add(&a.adjoint())?.scale_real(0.5))
}
