//! One-sided (Hestenes) Jacobi SVD for small dense complex matrices.
//!
//! Works directly on the columns of `A` (or `A*` when `A` is wide), so small
//! singular values keep full relative accuracy instead of being squared.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;
const ROTATION_TOL: f64 = 1e-15;

/// Thin SVD `A = U diag(σ) V*` with `σ` sorted in decreasing order.
///
/// `u` is `rows x r`, `v` is `cols x r` with `r = min(rows, cols)`. Columns of
/// `u` belonging to zero singular values are zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

/// Column-major scratch: `cols` vectors of length `len`.
struct Columns {
    len: usize,
    data: Vec<C64>,
}

impl Columns {
    fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.len..(j + 1) * self.len]
    }

    fn pair_mut(&mut self, p: usize, q: usize) -> (&mut [C64], &mut [C64]) {
        debug_assert!(p < q);
        let (lo, hi) = self.data.split_at_mut(q * self.len);
        (&mut lo[p * self.len..(p + 1) * self.len], &mut hi[..self.len])
    }
}

fn rotate(bp: &mut [C64], bq: &mut [C64], c: f64, s: f64, phase: C64) {
    for (x, y) in bp.iter_mut().zip(bq.iter_mut()) {
        let yq = *y * phase;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Orthogonalize the columns of `b` (tall, `m x n`, `m >= n`), accumulating the
/// right rotations into `v` (`n x n`) when requested.
fn hestenes(b: &mut Columns, n: usize, mut v: Option<&mut Columns>) {
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (bp, bq) = (b.col(p), b.col(q));
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = ZERO;
                    for (x, y) in bp.iter().zip(bq) {
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= ROTATION_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (bp, bq) = b.pair_mut(p, q);
                rotate(bp, bq, c, s, phase);
                if let Some(v) = v.as_deref_mut() {
                    let (vp, vq) = v.pair_mut(p, q);
                    rotate(vp, vq, c, s, phase);
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

fn check(a: &CMatrix) -> Result<()> {
    if a.is_empty() {
        return Err(Error::EmptyInput("matrix"));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    Ok(())
}

/// Columns of `a` if tall, columns of `a*` if wide.
fn tall_columns(a: &CMatrix) -> (Columns, usize, bool) {
    let wide = a.cols() > a.rows();
    let (m, n) = if wide { (a.cols(), a.rows()) } else { (a.rows(), a.cols()) };
    let mut data = Vec::with_capacity(m * n);
    for j in 0..n {
        for i in 0..m {
            data.push(if wide { a[(j, i)].conj() } else { a[(i, j)] });
        }
    }
    (Columns { len: m, data }, n, wide)
}

fn sorted_norms(b: &Columns, n: usize) -> Vec<(f64, usize)> {
    let mut s: Vec<(f64, usize)> = (0..n)
        .map(|j| (b.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(), j))
        .collect();
    s.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    s
}

pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    check(a)?;
    let (mut b, n, _) = tall_columns(a);
    hestenes(&mut b, n, None);
    Ok(sorted_norms(&b, n).into_iter().map(|(s, _)| s).collect())
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    check(a)?;
    let (mut b, n, wide) = tall_columns(a);
    let mut v = Columns {
        len: n,
        data: vec![ZERO; n * n],
    };
    for j in 0..n {
        v.data[j * n + j] = ONE;
    }
    hestenes(&mut b, n, Some(&mut v));
    let order = sorted_norms(&b, n);
    let m = b.len;
    // For the tall matrix B = W Σ V*: left vectors are the normalized columns.
    let mut left = CMatrix::zeros(m, n);
    let mut right = CMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &(s, j)) in order.iter().enumerate() {
        sigma.push(s);
        if s > 0.0 {
            for i in 0..m {
                left[(i, k)] = b.col(j)[i] / s;
            }
        }
        for i in 0..n {
            right[(i, k)] = v.col(j)[i];
        }
    }
    // B = A or B = A*; if A* = W Σ V* then A = V Σ W*.
    Ok(if wide {
        Svd { u: right, sigma, v: left }
    } else {
        Svd { u: left, sigma, v: right }
    })
}

pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?[0])
}

pub fn nuclear_norm(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// Largest singular value with its left and right singular vectors.
pub fn top_singular_triplet(a: &CMatrix) -> Result<(f64, Vec<C64>, Vec<C64>)> {
    let d = svd(a)?;
    Ok((d.sigma[0], d.u.column(0), d.v.column(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn reconstruct(d: &Svd) -> CMatrix {
        let s = CMatrix::from_fn(d.sigma.len(), d.sigma.len(), |i, j| {
            if i == j {
                C64::new(d.sigma[i], 0.0)
            } else {
                ZERO
            }
        });
        d.u.matmul(&s).unwrap().matmul(&d.v.adjoint()).unwrap()
    }

    #[test]
    fn identity_has_unit_spectral_norm() {
        assert_eq!(spectral_norm(&CMatrix::identity(3)).unwrap(), 1.0);
        assert_eq!(nuclear_norm(&CMatrix::identity(3)).unwrap(), 3.0);
    }

    #[test]
    fn nilpotent_two() {
        let a = CMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(spectral_norm(&a).unwrap(), 2.0);
    }

    #[test]
    fn rank_one_nuclear_norm_is_product_of_lengths() {
        let mut r = rng::seeded(3);
        let mut u = rng::gaussian_vector(&mut r, 4, true);
        let mut v = rng::gaussian_vector(&mut r, 5, true);
        let nu = super::super::l2_norm(&u);
        let nv = super::super::l2_norm(&v);
        u.iter_mut().for_each(|z| *z /= nu);
        v.iter_mut().for_each(|z| *z /= nv);
        let a = CMatrix::from_fn(4, 5, |i, j| u[i] * v[j].conj());
        assert!((nuclear_norm(&a).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn decomposition_reconstructs_tall_and_wide() {
        let mut r = rng::seeded(11);
        for &(m, n) in &[(5, 3), (3, 7), (4, 4), (1, 6), (6, 1)] {
            let a = rng::gaussian_matrix(&mut r, m, n, true);
            let d = svd(&a).unwrap();
            let err = reconstruct(&d).sub(&a).unwrap().frobenius();
            assert!(err < 1e-12 * a.frobenius(), "{m}x{n}: {err}");
            assert!(d.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn zero_matrix_and_empty_input() {
        assert_eq!(spectral_norm(&CMatrix::zeros(2, 3)).unwrap(), 0.0);
        assert_eq!(spectral_norm(&CMatrix::zeros(0, 0)), Err(Error::EmptyInput("matrix")));
    }
}
