//! Geometry of the strip `{0 <= Re z <= 1}`: harmonic measure at `θ` and
//! boundary values of the exponential candidate family.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::numerics::{C64, ZERO};

/// Harmonic measure at `θ` of `{j + is : s <= t}` on edge `j`, shifted so the
/// value at `t = 0` is zero. Edge 0 has total mass `1 − θ`, edge 1 mass `θ`.
pub(crate) fn edge_cdf(edge: usize, theta: f64, t: f64) -> f64 {
    let u = (0.5 * PI * t).tanh();
    let c = (0.5 * PI * theta).tan();
    if edge == 0 {
        (u / c).atan() / PI
    } else {
        (u * c).atan() / PI
    }
}

/// Harmonic-measure density on edge `j` at height `t`.
#[cfg(test)]
pub(crate) fn edge_density(edge: usize, theta: f64, t: f64) -> f64 {
    let s = (PI * theta).sin();
    let c = (PI * theta).cos();
    let sign = if edge == 0 { -1.0 } else { 1.0 };
    0.5 * s / ((PI * t).cosh() + sign * c)
}

/// Masses of the cells `[(i + o) h − h/2, (i + o) h + h/2] + period ℤ` with
/// `h = period / cells` and offset `o`: harmonic measure folded onto one
/// period.
pub(crate) fn folded_weights(edge: usize, theta: f64, period: f64, cells: usize, offset: f64) -> Vec<f64> {
    let h = period / cells as f64;
    // e^{−π·40} is far below double precision of the total mass.
    let reach = (40.0 / period).ceil() as i64 + 1;
    (0..cells)
        .map(|i| {
            let t = (i as f64 + offset) * h;
            let mut w = 0.0;
            for m in -reach..=reach {
                let c = t + m as f64 * period;
                w += edge_cdf(edge, theta, c + 0.5 * h) - edge_cdf(edge, theta, c - 0.5 * h);
            }
            w.max(0.0)
        })
        .collect()
}

/// Moduli `a_{j,q} = exp((shift + qΔ)(j − θ))`, `q = −Q..=Q`, of the modes
/// `e^{(shift + qΔ)(z − θ)}` on edge `j`.
pub(crate) fn edge_scales(edge: usize, theta: f64, shift: f64, spacing: f64, modes: usize) -> Vec<f64> {
    let x = edge as f64 - theta;
    (0..=2 * modes)
        .map(|idx| ((shift + (idx as f64 - modes as f64) * spacing) * x).exp())
        .collect()
}

/// Equispaced grid on `τ ∈ [0, 2π)` with the mode phases `e^{iqτ}`.
#[derive(Debug)]
pub(crate) struct TrigGrid {
    modes: usize,
    points: usize,
    phases: Vec<C64>,
}

impl TrigGrid {
    pub(crate) fn new(modes: usize, points: usize) -> Self {
        let width = 2 * modes + 1;
        let mut phases = Vec::with_capacity(points * width);
        for i in 0..points {
            let tau = 2.0 * PI * i as f64 / points as f64;
            for idx in 0..width {
                let q = idx as f64 - modes as f64;
                phases.push(C64::from_polar(1.0, q * tau));
            }
        }
        Self { modes, points, phases }
    }

    pub(crate) fn points(&self) -> usize {
        self.points
    }

    fn row(&self, i: usize) -> &[C64] {
        let w = 2 * self.modes + 1;
        &self.phases[i * w..(i + 1) * w]
    }

    /// `out = Σ_q scales_q e^{iqτ_i} coeffs_q`.
    pub(crate) fn eval(&self, i: usize, scales: &[f64], coeffs: &[Vec<C64>], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = ZERO);
        for ((ph, s), c) in self.row(i).iter().zip(scales).zip(coeffs) {
            let f = *ph * *s;
            for (o, v) in out.iter_mut().zip(c) {
                *o += f * v;
            }
        }
    }

    /// Adjoint of `eval`: `acc_q += weight · scales_q · e^{−iqτ_i} · grad`.
    pub(crate) fn accumulate(&self, i: usize, scales: &[f64], weight: f64, grad: &[C64], acc: &mut [Vec<C64>]) {
        for ((ph, s), a) in self.row(i).iter().zip(scales).zip(acc.iter_mut()) {
            let f = ph.conj() * (*s * weight);
            for (o, g) in a.iter_mut().zip(grad) {
                *o += f * g;
            }
        }
    }
}

/// Real packing of `2Q+1` coefficient vectors: `w[2(qD + c) + {0,1}]`.
pub(crate) fn pack(coeffs: &[Vec<C64>]) -> Vec<f64> {
    coeffs.iter().flat_map(|v| v.iter().flat_map(|z| [z.re, z.im])).collect()
}

pub(crate) fn unpack(w: &[f64], dim: usize, coeffs: &mut [Vec<C64>]) {
    for (q, v) in coeffs.iter_mut().enumerate() {
        for (c, z) in v.iter_mut().enumerate() {
            let k = 2 * (q * dim + c);
            *z = C64::new(w[k], w[k + 1]);
        }
    }
}
