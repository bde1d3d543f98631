//! Upper bounds from explicit analytic functions
//! `f(z) = e^{λ(z−θ)} Σ_{q=−Q}^{Q} e^{qΔ(z−θ)} v_q` with `Σ_q v_q = x`.
//!
//! On edge `j` the norm of `f(j + it)` is the norm of a vector trigonometric
//! polynomial of degree `Q` in `τ = Δt`, so the sup over the whole edge is a
//! sup over one period and a finite grid certifies it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::lbfgs::minimize;
use super::strip::{edge_scales, pack, unpack, TrigGrid};
use super::{check_theta, geometric_mean, upper_geometric, Budget, NormCouple};
use crate::error::{Error, Result};
use crate::numerics::{C64, ZERO};

const CONTINUATION: [f64; 4] = [8.0, 32.0, 128.0, 512.0];

/// Candidate `f` with `f(θ) = Σ_q v_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticCandidate {
    pub theta: f64,
    /// Common exponent `λ`.
    pub shift: f64,
    /// Mode spacing `Δ`.
    pub spacing: f64,
    /// `v_{−Q}, …, v_Q`.
    pub coeffs: Vec<Vec<C64>>,
}

impl AnalyticCandidate {
    pub fn modes(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn eval(&self, z: C64) -> Vec<C64> {
        let q0 = self.modes() as f64;
        let dim = self.coeffs[0].len();
        let mut out = vec![ZERO; dim];
        for (idx, v) in self.coeffs.iter().enumerate() {
            let rate = self.shift + (idx as f64 - q0) * self.spacing;
            let e = ((z - self.theta) * rate).exp();
            for (o, c) in out.iter_mut().zip(v) {
                *o += e * c;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalderonResult {
    /// Certified `M_0^{1−θ} M_1^θ` of the best candidate found.
    pub upper: f64,
    /// Part of `upper` due to boundary discretization.
    pub margin: f64,
    /// The budget could not support a search; `upper` is the geometric bound.
    pub fallback: bool,
    /// Certified edge suprema `M_0, M_1`.
    pub edge_sups: [f64; 2],
    pub candidate: Option<AnalyticCandidate>,
}

struct Problem<'a> {
    x: &'a [C64],
    couple: &'a NormCouple,
    theta: f64,
    budget: &'a Budget,
}

impl Problem<'_> {
    fn width(&self) -> usize {
        2 * self.budget.modes + 1
    }

    fn scales(&self, shift: f64) -> [Vec<f64>; 2] {
        let b = self.budget;
        [
            edge_scales(0, self.theta, shift, b.spacing, b.modes),
            edge_scales(1, self.theta, shift, b.spacing, b.modes),
        ]
    }

    /// p-mean of all boundary norms on the grid, with gradient.
    fn objective(&self, grid: &TrigGrid, scales: &[Vec<f64>; 2], p: f64, w: &[f64], grad: &mut [f64]) -> Result<f64> {
        let dim = self.x.len();
        let width = self.width();
        let mut coeffs = vec![vec![ZERO; dim]; width];
        unpack(w, dim, &mut coeffs);
        let total = 2 * grid.points();
        let mut values = Vec::with_capacity(total);
        let mut grads = Vec::with_capacity(total);
        let mut f = vec![ZERO; dim];
        for (edge, s) in scales.iter().enumerate() {
            for i in 0..grid.points() {
                grid.eval(i, s, &coeffs, &mut f);
                let mut g = vec![ZERO; dim];
                values.push(self.couple.oracle(edge).norm_grad(&f, &mut g)?);
                grads.push(g);
            }
        }
        let nmax = values.iter().copied().fold(0.0, f64::max);
        grad.iter_mut().for_each(|g| *g = 0.0);
        if nmax == 0.0 {
            return Ok(0.0);
        }
        let mean: f64 = values.iter().map(|v| (v / nmax).powf(p)).sum::<f64>() / total as f64;
        let factor = mean.powf(1.0 / p - 1.0) / total as f64;
        let mut acc = vec![vec![ZERO; dim]; width];
        for (k, (v, g)) in values.iter().zip(&grads).enumerate() {
            let weight = factor * (v / nmax).powf(p - 1.0);
            if weight > 1e-300 {
                let (edge, i) = (k / grid.points(), k % grid.points());
                grid.accumulate(i, &scales[edge], weight, g, &mut acc);
            }
        }
        grad.copy_from_slice(&pack(&acc));
        Ok(nmax * mean.powf(1.0 / p))
    }

    fn edge_max(&self, grid: &TrigGrid, scales: &[Vec<f64>; 2], coeffs: &[Vec<C64>]) -> Result<[f64; 2]> {
        let mut f = vec![ZERO; self.x.len()];
        let mut out = [0.0_f64; 2];
        for (edge, s) in scales.iter().enumerate() {
            for i in 0..grid.points() {
                grid.eval(i, s, coeffs, &mut f);
                out[edge] = out[edge].max(self.couple.norm(edge, &f)?);
            }
        }
        Ok(out)
    }

    /// Certified sup of each edge: grid maximum inflated by the smaller of the
    /// Bernstein factor `1/cos(πQ/T)` and a first-order Lipschitz margin.
    fn certify(&self, shift: f64, coeffs: &[Vec<C64>]) -> Result<([f64; 2], [f64; 2])> {
        let b = self.budget;
        let grid = TrigGrid::new(b.modes, b.cert_points);
        let scales = self.scales(shift);
        let grid_max = self.edge_max(&grid, &scales, coeffs)?;
        let bern = (PI * b.modes as f64 / b.cert_points as f64).cos();
        let mut sups = [0.0; 2];
        for edge in 0..2 {
            let mut deriv = 0.0;
            for (idx, v) in coeffs.iter().enumerate() {
                let q = (idx as f64 - b.modes as f64).abs();
                if q > 0.0 {
                    deriv += q * scales[edge][idx] * self.couple.norm(edge, v)?;
                }
            }
            let lip = grid_max[edge] + PI / b.cert_points as f64 * deriv;
            sups[edge] = (grid_max[edge] / bern).min(lip);
        }
        Ok((sups, grid_max))
    }
}

fn restore_constraint(x: &[C64], coeffs: &mut [Vec<C64>], center: usize) {
    for c in 0..x.len() {
        let others: C64 = coeffs.iter().enumerate().filter(|(q, _)| *q != center).map(|(_, v)| v[c]).sum();
        coeffs[center][c] = x[c] - others;
    }
}

/// Minimizes the boundary sup over the candidate family and certifies the
/// result on a fine grid.
pub fn upper_calderon(x: &[C64], couple: &NormCouple, theta: f64, budget: &Budget) -> Result<CalderonResult> {
    check_theta(theta)?;
    if theta == 0.0 || theta == 1.0 {
        return Err(Error::InvalidParameter("the Calderón search needs theta in (0, 1)".into()));
    }
    let geometric = upper_geometric(x, couple, theta)?;
    let n0 = couple.norm(0, x)?;
    let n1 = couple.norm(1, x)?;
    let fallback = CalderonResult {
        upper: geometric,
        margin: 0.0,
        fallback: true,
        edge_sups: [n0, n1],
        candidate: None,
    };
    if geometric == 0.0 {
        return Ok(CalderonResult { fallback: false, ..fallback });
    }
    if !budget.is_usable() {
        return Ok(fallback);
    }
    let pb = Problem {
        x,
        couple,
        theta,
        budget,
    };
    let dim = x.len();
    let width = pb.width();
    let center = budget.modes;
    let mut coeffs = vec![vec![ZERO; dim]; width];
    coeffs[center] = x.to_vec();
    let mut shift = (n0 / n1).ln();
    let grid = TrigGrid::new(budget.modes, budget.opt_points);
    let mut w = pack(&coeffs);
    // Orthogonal projector onto {Σ_q dv_q = 0}.
    let per_q = 2 * dim;
    let projector = move |g: &mut [f64]| {
        for k in 0..per_q {
            let mean = (0..width).map(|q| g[q * per_q + k]).sum::<f64>() / width as f64;
            for q in 0..width {
                g[q * per_q + k] -= mean;
            }
        }
    };
    for &p in &CONTINUATION {
        let scales = pb.scales(shift);
        minimize(&mut w, budget.iterations, Some(&projector), |w, g| pb.objective(&grid, &scales, p, w, g))?;
        unpack(&w, dim, &mut coeffs);
        let m = pb.edge_max(&grid, &scales, &coeffs)?;
        if m[0] > 0.0 && m[1] > 0.0 {
            shift += (m[0] / m[1]).ln();
        }
    }
    restore_constraint(x, &mut coeffs, center);
    let (sups, grid_max) = pb.certify(shift, &coeffs)?;
    let upper = geometric_mean(sups[0], sups[1], theta) + crate::CERT_SLACK;
    if !(upper < geometric) {
        return Ok(CalderonResult {
            upper: geometric,
            margin: 0.0,
            fallback: false,
            edge_sups: [n0, n1],
            candidate: None,
        });
    }
    Ok(CalderonResult {
        upper,
        margin: upper - geometric_mean(grid_max[0], grid_max[1], theta),
        fallback: false,
        edge_sups: sups,
        candidate: Some(AnalyticCandidate {
            theta,
            shift,
            spacing: budget.spacing,
            coeffs,
        }),
    })
}
