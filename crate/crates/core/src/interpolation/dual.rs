//! Lower bounds from analytic families of functionals.
//!
//! For bounded analytic `f` with `f(θ) = x` and `g` with `g(θ) = ξ`,
//! `log|⟨g, f⟩|` is subharmonic, so
//! `|⟨ξ, x⟩| <= M_0(f)^{1−θ} M_1(f)^θ · exp(Σ_j ∫_{edge j} log‖g‖_{j*} dμ_θ)`
//! where `μ_θ` is harmonic measure at `θ`. Taking `g ≡ ξ` recovers the
//! constant-functional bound; richer `g` are searched in the same exponential
//! family as the primal candidates.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::lbfgs::{hyperplane, minimize};
use super::strip::{edge_scales, folded_weights, pack, unpack, TrigGrid};
use super::{check_theta, Budget, NormCouple};
use crate::error::Result;
use crate::numerics::{pairing, C64, ZERO};
use crate::opspaces::NormOracle;

const BALANCE_ROUNDS: usize = 3;

/// Certified lower bound from an analytic functional family.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticDual {
    /// `ξ = g(θ)`.
    pub xi: Vec<C64>,
    pub pairing: f64,
    /// Upper bounds on `∫ log‖g‖_{j*} dμ_θ` over each edge.
    pub log_dual: [f64; 2],
    pub lower: f64,
}

struct Problem<'a> {
    duals: [&'a dyn NormOracle; 2],
    theta: f64,
    budget: &'a Budget,
    dim: usize,
}

#[derive(Clone, Copy)]
enum Objective {
    /// `Σ W ‖g‖`: convex surrogate, balanced by the shift.
    Linear,
    /// `Σ W log ‖g‖`: the certified quantity itself.
    Log,
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

    fn period(&self) -> f64 {
        2.0 * PI / self.budget.spacing
    }

    fn objective(
        &self,
        grid: &TrigGrid,
        scales: &[Vec<f64>; 2],
        weights: &[Vec<f64>; 2],
        kind: Objective,
        w: &[f64],
        grad: &mut [f64],
    ) -> Result<f64> {
        let mut coeffs = vec![vec![ZERO; self.dim]; self.width()];
        unpack(w, self.dim, &mut coeffs);
        let mut acc = vec![vec![ZERO; self.dim]; self.width()];
        let mut f = vec![ZERO; self.dim];
        let mut g = vec![ZERO; self.dim];
        let mut total = 0.0;
        for edge in 0..2 {
            for i in 0..grid.points() {
                grid.eval(i, &scales[edge], &coeffs, &mut f);
                let v = self.duals[edge].norm_grad(&f, &mut g)?;
                let wt = weights[edge][i];
                let (val, dw) = match kind {
                    Objective::Linear => (wt * v, wt),
                    Objective::Log => {
                        let v = v.max(1e-300);
                        (wt * v.ln(), wt / v)
                    }
                };
                total += val;
                grid.accumulate(i, &scales[edge], dw, &g, &mut acc);
            }
        }
        grad.copy_from_slice(&pack(&acc));
        Ok(total)
    }

    /// Harmonic-measure averages `J_j` of `‖g‖_{j*}` on the optimization grid.
    fn averages(&self, grid: &TrigGrid, scales: &[Vec<f64>; 2], weights: &[Vec<f64>; 2], coeffs: &[Vec<C64>]) -> Result<[f64; 2]> {
        let mut f = vec![ZERO; self.dim];
        let mut out = [0.0; 2];
        for edge in 0..2 {
            for i in 0..grid.points() {
                grid.eval(i, &scales[edge], coeffs, &mut f);
                out[edge] += weights[edge][i] * self.duals[edge].norm(&f)?;
            }
        }
        out[0] /= 1.0 - self.theta;
        out[1] /= self.theta;
        Ok(out)
    }

    /// Upper bound on `∫ log‖g‖ dμ_θ` for each edge. Between neighbouring
    /// grid points `a, b` the boundary value is the chord `(1−s)p(a) + s p(b)`
    /// plus a remainder of norm at most `h²/8 · sup‖p''‖ <= h²/8 · Q² sup‖p‖`
    /// (Bernstein), and the chord's norm is at most `max(‖p(a)‖, ‖p(b)‖)`.
    fn certify(&self, shift: f64, coeffs: &[Vec<C64>]) -> Result<[f64; 2]> {
        let b = self.budget;
        let t = b.cert_points;
        let grid = TrigGrid::new(b.modes, t);
        let scales = self.scales(shift);
        let mut f = vec![ZERO; self.dim];
        let mut out = [0.0; 2];
        let h = 2.0 * PI / t as f64;
        let q = b.modes as f64;
        for edge in 0..2 {
            let weights = folded_weights(edge, self.theta, self.period(), t, 0.5);
            let values = (0..t)
                .map(|i| {
                    grid.eval(i, &scales[edge], coeffs, &mut f);
                    self.duals[edge].norm(&f)
                })
                .collect::<Result<Vec<_>>>()?;
            let grid_max = values.iter().copied().fold(0.0, f64::max);
            let sup = grid_max / (PI * q / t as f64).cos();
            let remainder = h * h / 8.0 * q * q * sup;
            out[edge] = (0..t)
                .map(|i| {
                    let top = values[i].max(values[(i + 1) % t]);
                    weights[i] * (top + remainder).max(1e-300).ln()
                })
                .sum();
        }
        Ok(out)
    }
}

/// Optimizes an analytic functional family started at the constant `ξ_0`
/// and returns its certified lower bound. `None` when the couple has no dual
/// norms, the budget is unusable, or `⟨ξ_0, x⟩ = 0`.
pub fn lower_dual_analytic(
    x: &[C64],
    couple: &NormCouple,
    theta: f64,
    budget: &Budget,
    start: &[C64],
) -> Result<Option<AnalyticDual>> {
    check_theta(theta)?;
    couple.check(x)?;
    couple.check(start)?;
    let duals = match (couple.dual_oracle(0), couple.dual_oracle(1)) {
        (Some(a), Some(b)) => [a, b],
        _ => return Ok(None),
    };
    if theta == 0.0 || theta == 1.0 || !budget.is_usable() {
        return Ok(None);
    }
    let p0 = pairing(start, x);
    if p0.norm() == 0.0 {
        return Ok(None);
    }
    let dim = x.len();
    let pb = Problem {
        duals,
        theta,
        budget,
        dim,
    };
    let width = pb.width();
    let center = budget.modes;
    // Rotate and scale so that ⟨ξ_0, x⟩ = 1.
    let unit = C64::new(1.0, 0.0) / p0;
    let mut coeffs = vec![vec![ZERO; dim]; width];
    coeffs[center] = start.iter().map(|z| *z * unit).collect();
    let d0 = duals[0].norm(&coeffs[center])?;
    let d1 = duals[1].norm(&coeffs[center])?;
    let mut shift = (d0 / d1).ln();
    // Constraint Re⟨x, Σ_q u_q⟩ = 1 in real coordinates.
    let normal: Vec<f64> = (0..width).flat_map(|_| x.iter().flat_map(|z| [z.re, -z.im])).collect();
    let projector = hyperplane(&normal);
    let grid = TrigGrid::new(budget.modes, budget.opt_points);
    let weights = [
        folded_weights(0, theta, pb.period(), budget.opt_points, 0.0),
        folded_weights(1, theta, pb.period(), budget.opt_points, 0.0),
    ];
    let mut w = pack(&coeffs);
    for _ in 0..BALANCE_ROUNDS {
        let scales = pb.scales(shift);
        minimize(&mut w, budget.iterations, Some(&projector), |w, g| {
            pb.objective(&grid, &scales, &weights, Objective::Linear, w, g)
        })?;
        unpack(&w, dim, &mut coeffs);
        let j = pb.averages(&grid, &scales, &weights, &coeffs)?;
        if j[0] > 0.0 && j[1] > 0.0 {
            shift += (j[0] / j[1]).ln();
        }
    }
    let scales = pb.scales(shift);
    minimize(&mut w, budget.iterations, Some(&projector), |w, g| {
        pb.objective(&grid, &scales, &weights, Objective::Log, w, g)
    })?;
    unpack(&w, dim, &mut coeffs);
    let xi: Vec<C64> = (0..dim).map(|c| coeffs.iter().map(|v| v[c]).sum()).collect();
    let pairing_value = pairing(&xi, x).norm();
    let log_dual = pb.certify(shift, &coeffs)?;
    let lower = (pairing_value / (log_dual[0] + log_dual[1]).exp() - crate::CERT_SLACK).max(0.0);
    Ok(Some(AnalyticDual {
        xi,
        pairing: pairing_value,
        log_dual,
        lower,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolation::hilbert_couple_exact;
    use crate::numerics::CMatrix;

    #[test]
    fn constant_start_reproduces_simple_bound_or_better() {
        let s0 = CMatrix::from_real_rows(&[&[2.0, 0.5], &[0.5, 1.0]]).unwrap();
        let s1 = CMatrix::from_real_rows(&[&[1.0, -0.3], &[-0.3, 5.0]]).unwrap();
        let c = NormCouple::hilbert(s0.clone(), s1.clone()).unwrap();
        let x = [C64::new(1.0, 0.5), C64::new(-0.7, 0.2)];
        let xi: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        let simple = super::super::lower_dual(&x, &c, 0.35, &xi).unwrap().lower;
        let d = lower_dual_analytic(&x, &c, 0.35, &Budget::default(), &xi).unwrap().unwrap();
        let exact = hilbert_couple_exact(&s0, &s1, 0.35, &x).unwrap();
        assert!(d.lower <= exact * (1.0 + 1e-12), "{} > {exact}", d.lower);
        assert!(d.lower >= simple * (1.0 - 1e-3));
        assert!(d.lower >= 0.99 * exact, "{} vs {exact}", d.lower);
    }
}
