//! Cholesky factorizations: Hermitian positive definite complex matrices and
//! dense real symmetric systems.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Lower-triangular `l` with `a = l l*`. Only the lower triangle of `a` is read.
pub fn cholesky(a: &CMatrix) -> Result<CMatrix> {
    let n = a.rows();
    if !a.is_square() || n == 0 {
        return Err(Error::EmptyInput("square matrix"));
    }
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for p in 0..j {
            d -= l[(j, p)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Inverse and log-determinant of a Hermitian positive definite matrix.
pub fn hpd_inverse(a: &CMatrix) -> Result<(CMatrix, f64)> {
    let l = cholesky(a)?;
    let n = a.rows();
    let logdet = 2.0 * (0..n).map(|i| l[(i, i)].re.ln()).sum::<f64>();
    // Invert l column by column, then a⁻¹ = l⁻* l⁻¹.
    let mut li = CMatrix::zeros(n, n);
    for c in 0..n {
        for i in c..n {
            let mut s = if i == c { C64::new(1.0, 0.0) } else { ZERO };
            for p in c..i {
                s -= l[(i, p)] * li[(p, c)];
            }
            li[(i, c)] = s / l[(i, i)];
        }
    }
    let inv = CMatrix::from_fn(n, n, |i, j| (i.max(j)..n).map(|p| li[(p, i)].conj() * li[(p, j)]).sum());
    Ok((inv, logdet))
}

/// Solves `h x = b` for a dense symmetric positive definite `h` (row-major).
pub fn solve_spd(h: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if h.len() != n * n {
        return Err(Error::Shape(alloc::format!("{} entries for a system of size {n}", h.len())));
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let d = h[j * n + j] - (0..j).map(|p| l[j * n + p] * l[j * n + p]).sum::<f64>();
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let s = h[i * n + j] - (0..j).map(|p| l[i * n + p] * l[j * n + p]).sum::<f64>();
            l[i * n + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for p in 0..i {
            y[i] -= l[i * n + p] * y[p];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for p in i + 1..n {
            y[i] -= l[p * n + i] * y[p];
        }
        y[i] /= l[i * n + i];
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_a_complex_hpd_matrix() {
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64 * 0.3 - 0.4, (i as f64 - j as f64) * 0.2));
        let mut a = b.matmul(&b.adjoint()).unwrap();
        for i in 0..3 {
            a[(i, i)] += C64::new(1.0, 0.0);
        }
        let (inv, logdet) = hpd_inverse(&a).unwrap();
        let id = a.matmul(&inv).unwrap();
        assert!(id.sub(&CMatrix::identity(3)).unwrap().max_abs() < 1e-12);
        let l = cholesky(&a).unwrap();
        let det: f64 = (0..3).map(|i| l[(i, i)].re.powi(2)).product();
        assert!((logdet - det.ln()).abs() < 1e-12);
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert_eq!(cholesky(&a), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn real_spd_solve() {
        let h = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let x = solve_spd(&h, &[1.0, 2.0, 3.0]).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| h[i * 3 + j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
    }
}
