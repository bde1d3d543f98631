//! Minimum-ℓ1 preimages `argmin { ‖y‖_1 : q y = x }` for real systems.
//!
//! Dense two-phase tableau simplex with Bland's rule. After the ℓ1 optimum is
//! reached, a third pass restricted to the optimal face minimizes the
//! index-weighted cost `Σ_j (j + 1) v_j` over the split variables
//! `v = (y⁺_1..y⁺_M, y⁻_1..y⁻_M)`, which singles out one optimal vertex
//! deterministically. Every pivoting decision compares quantities that scale
//! with `x`, so the selected basis, and hence the output, is positively
//! homogeneous in `x`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use super::CMatrix;
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct L1Preimage {
    pub y: Vec<f64>,
    pub l1: f64,
    pub residual: f64,
}

/// Numerical rank of a real matrix by Gaussian elimination with partial
/// pivoting.
pub fn rank(q: &CMatrix, tol: f64) -> usize {
    let (m, n) = (q.rows(), q.cols());
    let mut a: Vec<Vec<f64>> = (0..m).map(|i| (0..n).map(|j| q[(i, j)].re).collect()).collect();
    let scale = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let mut r = 0;
    for col in 0..n {
        if r == m {
            break;
        }
        let (piv, val) = (r..m)
            .map(|i| (i, a[i][col].abs()))
            .fold((r, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if val <= tol * scale {
            continue;
        }
        a.swap(r, piv);
        for i in (r + 1)..m {
            let f = a[i][col] / a[r][col];
            if f != 0.0 {
                for j in col..n {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        r += 1;
    }
    r
}

struct Tableau {
    rows: usize,
    // number of structural + artificial columns
    cols: usize,
    // rows x (cols + 1), last column is the rhs
    a: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.a[r * w + c];
        for j in 0..w {
            self.a[r * w + j] /= p;
        }
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * w + c];
            if f != 0.0 {
                for j in 0..w {
                    let v = self.a[r * w + j];
                    self.a[i * w + j] -= f * v;
                }
                self.a[i * w + c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs of `cost` for the current basis.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut red = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (j, r) in red.iter_mut().enumerate() {
                    *r -= cb * self.at(i, j);
                }
            }
        }
        red
    }

    /// Bland's-rule simplex minimizing `cost` with only `allowed` columns
    /// eligible to enter. Returns the number of pivots.
    fn minimize(&mut self, cost: &[f64], allowed: &[bool], rhs_scale: f64) -> Result<usize> {
        let cost_scale = cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        for pivots in 0..MAX_PIVOTS {
            let red = self.reduced_costs(cost);
            let entering = (0..self.cols)
                .find(|&j| allowed[j] && !self.basis.contains(&j) && red[j] < -COST_TOL * cost_scale);
            let Some(c) = entering else {
                return Ok(pivots);
            };
            let tie = PIVOT_TOL * rhs_scale;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let aic = self.at(i, c);
                if aic > PIVOT_TOL {
                    let ratio = self.rhs(i) / aic;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - tie || (ratio <= br + tie && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::InvalidParameter("unbounded linear program".into()));
            };
            self.pivot(r, c);
        }
        Err(Error::InvalidParameter(format!("simplex exceeded {MAX_PIVOTS} pivots")))
    }
}

/// Minimum-ℓ1 solution of `q y = x` for a real matrix `q` (imaginary parts must
/// be zero) of full row rank.
pub fn min_l1_preimage(q: &CMatrix, x: &[f64]) -> Result<L1Preimage> {
    if q.is_empty() {
        return Err(Error::EmptyInput("quotient matrix"));
    }
    if !q.is_real() {
        return Err(Error::ComplexUnsupported("min_l1_preimage"));
    }
    let (n_rows, m) = (q.rows(), q.cols());
    if x.len() != n_rows {
        return Err(Error::Shape(format!("rhs of length {} for {} rows", x.len(), n_rows)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rhs"));
    }
    let rk = rank(q, 1e-12);
    if rk < n_rows {
        return Err(Error::DegenerateQuotient {
            rank: rk,
            expected: n_rows,
        });
    }
    let rhs_scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if rhs_scale == 0.0 {
        return Ok(L1Preimage {
            y: vec![0.0; m],
            l1: 0.0,
            residual: 0.0,
        });
    }

    // columns: y⁺ (m), y⁻ (m), artificials (n_rows)
    let structural = 2 * m;
    let cols = structural + n_rows;
    let w = cols + 1;
    let mut a = vec![0.0; n_rows * w];
    for i in 0..n_rows {
        let sign = if x[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..m {
            let v = sign * q[(i, j)].re;
            a[i * w + j] = v;
            a[i * w + m + j] = -v;
        }
        a[i * w + structural + i] = 1.0;
        a[i * w + cols] = sign * x[i];
    }
    let mut t = Tableau {
        rows: n_rows,
        cols,
        a,
        basis: (structural..cols).collect(),
    };

    // phase one
    let mut cost1 = vec![0.0; cols];
    cost1[structural..].iter_mut().for_each(|c| *c = 1.0);
    let all = vec![true; cols];
    t.minimize(&cost1, &all, rhs_scale)?;
    let infeasibility: f64 = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= structural)
        .map(|(i, _)| t.rhs(i).abs())
        .sum();
    if infeasibility > 1e-9 * rhs_scale.max(1.0) {
        return Err(Error::NoPreimage {
            residual: infeasibility,
        });
    }
    // drive remaining (zero-level) artificials out of the basis
    for r in 0..n_rows {
        if t.basis[r] >= structural {
            if let Some(c) = (0..structural).find(|&j| !t.basis.contains(&j) && t.at(r, j).abs() > PIVOT_TOL) {
                t.pivot(r, c);
            }
        }
    }

    // phase two: ℓ1 cost, artificials barred
    let mut structural_only = vec![true; cols];
    structural_only[structural..].iter_mut().for_each(|b| *b = false);
    let mut cost2 = vec![0.0; cols];
    cost2[..structural].iter_mut().for_each(|c| *c = 1.0);
    t.minimize(&cost2, &structural_only, rhs_scale)?;

    // phase three: index-weighted tie-break on the optimal face
    let red = t.reduced_costs(&cost2);
    let face: Vec<bool> = (0..cols)
        .map(|j| j < structural && red[j].abs() <= COST_TOL)
        .collect();
    let mut cost3 = vec![0.0; cols];
    for (j, c) in cost3.iter_mut().enumerate().take(structural) {
        *c = (j + 1) as f64;
    }
    t.minimize(&cost3, &face, rhs_scale)?;

    let mut v = vec![0.0; structural];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < structural {
            v[b] = t.rhs(i);
        }
    }
    let y: Vec<f64> = (0..m).map(|j| v[j] - v[m + j]).collect();
    let l1 = y.iter().map(|v| v.abs()).sum();
    let residual = (0..n_rows)
        .map(|i| {
            let qy: f64 = (0..m).map(|j| q[(i, j)].re * y[j]).sum();
            (qy - x[i]).abs()
        })
        .fold(0.0, f64::max);
    Ok(L1Preimage { y, l1, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign_quotient() -> CMatrix {
        // columns (1,1), (1,-1), (-1,1), (-1,-1)
        CMatrix::from_real_rows(&[&[1.0, 1.0, -1.0, -1.0], &[1.0, -1.0, 1.0, -1.0]]).unwrap()
    }

    /// Every basic solution of a 2-row system uses at most two columns; with
    /// the split into ±, enumerate all column pairs and solve 2x2 systems.
    fn brute_force_min_l1(q: &CMatrix, x: &[f64]) -> f64 {
        let m = q.cols();
        let mut best = f64::INFINITY;
        for i in 0..m {
            for j in i..m {
                let (a, b, c, d) = (q[(0, i)].re, q[(0, j)].re, q[(1, i)].re, q[(1, j)].re);
                let det = a * d - b * c;
                if i == j || det.abs() < 1e-14 {
                    // single column: needs x parallel to column i
                    let col = [q[(0, i)].re, q[(1, i)].re];
                    let t = (col[0] * x[0] + col[1] * x[1]) / (col[0] * col[0] + col[1] * col[1]);
                    if (col[0] * t - x[0]).abs() < 1e-12 && (col[1] * t - x[1]).abs() < 1e-12 {
                        best = best.min(t.abs());
                    }
                    continue;
                }
                let yi = (x[0] * d - b * x[1]) / det;
                let yj = (a * x[1] - c * x[0]) / det;
                best = best.min(yi.abs() + yj.abs());
            }
        }
        best
    }

    #[test]
    fn sign_vectors_example() {
        let q = sign_quotient();
        let sol = min_l1_preimage(&q, &[1.0, 0.0]).unwrap();
        assert_eq!(sol.y, vec![0.5, 0.5, 0.0, 0.0]);
        assert!((sol.l1 - 1.0).abs() < 1e-15);
        assert!((brute_force_min_l1(&q, &[1.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn optimum_matches_vertex_enumeration() {
        let q = sign_quotient();
        let mut r = crate::rng::seeded(5);
        for _ in 0..200 {
            let x = [crate::rng::normal(&mut r), crate::rng::normal(&mut r)];
            let sol = min_l1_preimage(&q, &x).unwrap();
            let brute = brute_force_min_l1(&q, &x);
            assert!((sol.l1 - brute).abs() < 1e-12 * brute.max(1.0));
            assert!(sol.residual < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let sol = min_l1_preimage(&sign_quotient(), &[0.0, 0.0]).unwrap();
        assert_eq!(sol.y, vec![0.0; 4]);
    }

    #[test]
    fn identity_quotient_returns_rhs() {
        let q = CMatrix::identity(3);
        let x = [0.3, -1.5, 2.0];
        let sol = min_l1_preimage(&q, &x).unwrap();
        assert_eq!(sol.y, x.to_vec());
    }

    #[test]
    fn rank_deficient_is_degenerate() {
        let q = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert_eq!(
            min_l1_preimage(&q, &[1.0, 2.0]),
            Err(Error::DegenerateQuotient { rank: 1, expected: 2 })
        );
    }

    #[test]
    fn positively_homogeneous_to_the_bit_pattern() {
        let q = sign_quotient();
        let mut r = crate::rng::seeded(9);
        for _ in 0..100 {
            let x = [crate::rng::normal(&mut r), crate::rng::normal(&mut r)];
            let alpha = 0.01 + 50.0 * crate::rng::uniform(&mut r);
            let a = min_l1_preimage(&q, &x).unwrap();
            let b = min_l1_preimage(&q, &[alpha * x[0], alpha * x[1]]).unwrap();
            for (u, v) in a.y.iter().zip(&b.y) {
                assert!((alpha * u - v).abs() <= 1e-12 * (alpha * u).abs().max(1e-300) + 1e-14 * alpha);
                assert_eq!(*u == 0.0, *v == 0.0, "support must not change");
            }
        }
    }
}
