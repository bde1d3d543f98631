//! The norm of `Z(Q)` at matrix level `k` as a semidefinite program.
//!
//! Every summand `Y_m` is a MIN space, so `‖x‖_{M_r(Y_m)} ≤ 1` iff
//! `‖f(x)‖ ≤ 1` for every `f` in the unit ball of `Y_m*`, and a factorization
//! `ȳ_m = α_m x_m β_m` exists with `α_m α_m* = A_m`, `β_m* β_m = B_m` iff
//! `[[A_m, f(ȳ_m)], [f(ȳ_m)*, B_m]] ⪰ 0` for all such `f`. Hence
//!
//! `‖ȳ‖ = min { t : Σ A_m ⪯ t, Σ B_m ⪯ t, [[A_m, f(ȳ_m)], [·, B_m]] ⪰ 0 }`.
//!
//! Restricting `f` to the rows of `Q` and the scaled sign vectors gives a
//! relaxation solved here by a primal barrier method. Neither bound depends on
//! the solver converging: the upper bound re-evaluates the full `Y_m` norms
//! on the final factors, and the lower bound is the value of a dual point that
//! is rescaled until it is exactly feasible.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{pow2_neg, ym_norm, QuotientMapData, ZElement};
use crate::error::Result;
use crate::numerics::{cholesky, hermitian_power, hpd_inverse, solve_spd, spectral_norm, CMatrix, C64, ZERO};
use crate::opspaces::{min_l1_norming_phases, OsElement};

/// Sign vectors are enumerated only up to this source dimension.
const MAX_SOURCE_DIM: usize = 8;
const MAX_OUTER: usize = 40;
const MAX_NEWTON: usize = 80;
const TAU_GROWTH: f64 = 30.0;
const REL_GAP: f64 = 1e-8;
const CUT_ROUNDS: usize = 4;

type Entries = Vec<(usize, usize, C64)>;

struct Lmi {
    size: usize,
    constant: CMatrix,
    terms: Vec<(usize, Entries)>,
}

impl Lmi {
    fn at(&self, x: &[f64]) -> CMatrix {
        let mut f = self.constant.clone();
        for (v, entries) in &self.terms {
            for &(r, c, a) in entries {
                f[(r, c)] += a * x[*v];
            }
        }
        f
    }
}

/// Basis of the Hermitian `k × k` matrices (real symmetric ones only when
/// `real`), as sparse entry lists.
fn hermitian_basis(k: usize, real: bool) -> Vec<Entries> {
    let one = C64::new(1.0, 0.0);
    let mut basis = Vec::new();
    for a in 0..k {
        basis.push(vec![(a, a, one)]);
        for b in a + 1..k {
            basis.push(vec![(a, b, one), (b, a, one)]);
            if !real {
                basis.push(vec![(a, b, C64::new(0.0, 1.0)), (b, a, C64::new(0.0, -1.0))]);
            }
        }
    }
    basis
}

fn shifted(entries: &Entries, dr: usize, dc: usize, sign: f64) -> Entries {
    entries.iter().map(|&(r, c, a)| (r + dr, c + dc, a * sign)).collect()
}

fn functionals(q: &QuotientMapData, m: u32) -> Vec<Vec<C64>> {
    let (n, dim) = (q.target_dim(), q.source_dim());
    let mut fs: Vec<Vec<C64>> = (0..n).map(|i| (0..dim).map(|j| q.matrix()[(i, j)]).collect()).collect();
    let s = pow2_neg(m);
    for bits in 0..1usize << (dim - 1) {
        fs.push(
            (0..dim)
                .map(|j| C64::new(if j > 0 && (bits >> (j - 1)) & 1 == 1 { -s } else { s }, 0.0))
                .collect(),
        );
    }
    fs
}

struct Problem {
    k: usize,
    nb: usize,
    lmis: Vec<Lmi>,
    /// Index of the first relaxation block of each summand.
    part_start: Vec<usize>,
    nvars: usize,
}

impl Problem {
    fn build(q: &QuotientMapData, z: &ZElement, scale: f64, cuts: &[Vec<Vec<C64>>]) -> Result<Self> {
        let k = z.k;
        // Real A_m, B_m suffice for real data: the constraint set is invariant
        // under conjugation and convex.
        let real = z.is_real();
        let basis = hermitian_basis(k, real);
        let nb = basis.len();
        let parts = z.parts.len();
        let nvars = 1 + 2 * parts * nb;
        let eye: Entries = (0..k).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
        let mut top_a = Lmi { size: k, constant: CMatrix::zeros(k, k), terms: vec![(0, eye.clone())] };
        let mut top_b = Lmi { size: k, constant: CMatrix::zeros(k, k), terms: vec![(0, eye)] };
        let mut blocks = Vec::new();
        let mut part_start = Vec::new();
        for (p, (m, y)) in z.parts.iter().enumerate() {
            let a0 = 1 + 2 * p * nb;
            let b0 = a0 + nb;
            for (i, e) in basis.iter().enumerate() {
                top_a.terms.push((a0 + i, shifted(e, 0, 0, -1.0)));
                top_b.terms.push((b0 + i, shifted(e, 0, 0, -1.0)));
            }
            part_start.push(2 + blocks.len());
            for f in functionals(q, *m).iter().chain(&cuts[p]) {
                let u = super::apply_functional(f, y)?.scale_real(1.0 / scale);
                let constant = CMatrix::from_fn(2 * k, 2 * k, |r, c| match (r < k, c < k) {
                    (true, false) => u[(r, c - k)],
                    (false, true) => u[(c, r - k)].conj(),
                    _ => ZERO,
                });
                let mut terms = Vec::with_capacity(2 * nb);
                for (i, e) in basis.iter().enumerate() {
                    terms.push((a0 + i, shifted(e, 0, 0, 1.0)));
                    terms.push((b0 + i, shifted(e, k, k, 1.0)));
                }
                blocks.push(Lmi { size: 2 * k, constant, terms });
            }
        }
        let mut lmis = vec![top_a, top_b];
        lmis.extend(blocks);
        Ok(Problem { k, nb, lmis, part_start, nvars })
    }

    fn degree(&self) -> f64 {
        self.lmis.iter().map(|l| l.size as f64).sum()
    }

    /// Strictly feasible start: `A_m = B_m = c_m I` with `c_m` above every
    /// `‖f(ȳ_m)‖`.
    fn start(&self) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.nvars];
        let mut total = 0.0;
        for p in 0..self.part_start.len() {
            let end = self.part_start.get(p + 1).copied().unwrap_or(self.lmis.len());
            let mut c = 0.0_f64;
            for l in &self.lmis[self.part_start[p]..end] {
                c = c.max(spectral_norm(&l.constant)?);
            }
            let c = 1.25 * c + 1e-3;
            total += c;
            let a0 = 1 + 2 * p * self.nb;
            for i in 0..self.k {
                // Diagonal basis elements come first in each row of the basis.
                let idx = self.diag_index(i);
                x[a0 + idx] = c;
                x[a0 + self.nb + idx] = c;
            }
        }
        x[0] = 1.25 * total + 1e-3;
        Ok(x)
    }

    fn diag_index(&self, i: usize) -> usize {
        let real = self.nb == self.k * (self.k + 1) / 2;
        let per_off = if real { 1 } else { 2 };
        (0..i).map(|a| 1 + per_off * (self.k - 1 - a)).sum()
    }

    /// Barrier value `τ t − Σ log det F_L`, or `None` outside the domain.
    fn barrier(&self, x: &[f64], tau: f64) -> Option<f64> {
        let mut v = tau * x[0];
        for l in &self.lmis {
            let c = cholesky(&l.at(x)).ok()?;
            v -= 2.0 * (0..l.size).map(|i| c[(i, i)].re.ln()).sum::<f64>();
        }
        Some(v)
    }

    fn inverses(&self, x: &[f64]) -> Result<Vec<CMatrix>> {
        self.lmis.iter().map(|l| Ok(hpd_inverse(&l.at(x))?.0)).collect()
    }

    fn newton_step(&self, x: &[f64], tau: f64) -> Result<(Vec<f64>, f64)> {
        let n = self.nvars;
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n * n];
        g[0] = tau;
        for (l, gi) in self.lmis.iter().zip(self.inverses(x)?) {
            for (v, ev) in &l.terms {
                g[*v] -= ev.iter().map(|&(r, c, a)| (a * gi[(c, r)]).re).sum::<f64>();
                for (w, ew) in &l.terms {
                    let mut s = 0.0;
                    for &(r1, c1, a1) in ev {
                        for &(r2, c2, a2) in ew {
                            s += (a1 * a2 * gi[(c1, r2)] * gi[(c2, r1)]).re;
                        }
                    }
                    h[v * n + w] += s;
                }
            }
        }
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        // Near the boundary the Hessian is badly conditioned; a relative
        // diagonal shift keeps the step a descent direction.
        let dx = match solve_spd(&h, &rhs) {
            Ok(dx) => dx,
            Err(_) => {
                let top = (0..n).map(|i| h[i * n + i]).fold(0.0, f64::max);
                for i in 0..n {
                    h[i * n + i] += 1e-10 * top;
                }
                solve_spd(&h, &rhs)?
            }
        };
        let dec = -g.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>();
        Ok((dx, dec))
    }

    /// Damped Newton on the barrier. Returns `false` when the Newton system
    /// could not be solved, which ends the path with the current iterate.
    fn centre(&self, x: &mut Vec<f64>, tau: f64) -> bool {
        for _ in 0..MAX_NEWTON {
            let Ok((dx, dec)) = self.newton_step(x, tau) else { return false };
            if dec / 2.0 < 1e-6 {
                break;
            }
            let f0 = self.barrier(x, tau).unwrap_or(f64::INFINITY);
            let mut s = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + s * d).collect();
                if let Some(f) = self.barrier(&trial, tau) {
                    if f <= f0 - 0.25 * s * dec {
                        *x = trial;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved {
                break;
            }
        }
        true
    }

    /// Barrier path; returns the last centred point and its `τ`.
    fn solve(&self) -> Result<(Vec<f64>, Option<f64>)> {
        let mut x = self.start()?;
        let nu = self.degree();
        let mut tau = nu / x[0];
        let mut centred = None;
        for _ in 0..MAX_OUTER {
            let mut trial = x.clone();
            if !self.centre(&mut trial, tau) {
                break;
            }
            x = trial;
            centred = Some(tau);
            if nu / tau < REL_GAP * x[0] {
                break;
            }
            tau *= TAU_GROWTH;
        }
        Ok((x, centred))
    }

    /// Factorization bound `‖Σ w_m A_m‖^{1/2} ‖Σ w_m B_m‖^{1/2}` with `w_m` the
    /// full `Y_m` norm of `A_m^{-1/2} ȳ_m B_m^{-1/2}`, plus a cut for every
    /// summand whose source term exceeds one.
    fn factor_upper(
        &self,
        q: &QuotientMapData,
        z: &ZElement,
        scale: f64,
        x: &[f64],
    ) -> Result<(f64, Vec<Vec<Vec<C64>>>)> {
        let k = self.k;
        let mut left = CMatrix::zeros(k, k);
        let mut right = CMatrix::zeros(k, k);
        let mut cuts = Vec::with_capacity(z.parts.len());
        let basis = hermitian_basis(k, self.nb == k * (k + 1) / 2);
        for (p, (m, y)) in z.parts.iter().enumerate() {
            let a0 = 1 + 2 * p * self.nb;
            let factor = |off: usize| {
                let terms = basis.iter().enumerate().map(|(i, e)| (a0 + off + i, e.clone())).collect();
                Lmi { size: k, constant: CMatrix::zeros(k, k), terms }.at(x)
            };
            let (am, bm) = (regularized(factor(0))?, regularized(factor(self.nb))?);
            let (ai, bi) = (hermitian_power(&am, -0.5)?, hermitian_power(&bm, -0.5)?);
            let coords = y
                .coords()
                .iter()
                .map(|c| ai.matmul(&c.scale_real(1.0 / scale))?.matmul(&bi))
                .collect::<Result<Vec<_>>>()?;
            let (v, omega) = min_l1_norming_phases(&coords)?;
            let s = pow2_neg(*m);
            cuts.push(if s * v > 1.0 + 1e-7 { vec![omega.iter().map(|w| w * s).collect()] } else { Vec::new() });
            let w = ym_norm(q, *m, &OsElement::new(y.space(), k, coords)?)?.upper;
            left.axpy(C64::new(w, 0.0), &am)?;
            right.axpy(C64::new(w, 0.0), &bm)?;
        }
        Ok(((spectral_norm(&left)? * spectral_norm(&right)?).sqrt(), cuts))
    }

    /// Weak-duality bound from `Z_L = F_L⁻¹ / τ`, with each summand's block
    /// scaled so that `Σ_f P_f ⪯ D_1` and `Σ_f S_f ⪯ D_2`.
    fn dual_value(&self, x: &[f64], tau: f64) -> Result<f64> {
        let k = self.k;
        let zs: Vec<CMatrix> = self.inverses(x)?.into_iter().map(|g| g.scale_real(1.0 / tau)).collect();
        let trace = (zs[0].trace() + zs[1].trace()).re;
        let (d1, d2) = (hermitian_power(&zs[0], -0.5)?, hermitian_power(&zs[1], -0.5)?);
        let mut total = 0.0;
        for p in 0..self.part_start.len() {
            let end = self.part_start.get(p + 1).copied().unwrap_or(self.lmis.len());
            let mut pp = CMatrix::zeros(k, k);
            let mut ss = CMatrix::zeros(k, k);
            let mut value = 0.0;
            for (l, zl) in self.lmis[self.part_start[p]..end].iter().zip(&zs[self.part_start[p]..end]) {
                for r in 0..k {
                    for c in 0..k {
                        pp[(r, c)] += zl[(r, c)];
                        ss[(r, c)] += zl[(r + k, c + k)];
                    }
                }
                value -= zl.matmul(&l.constant)?.trace().re;
            }
            let cp = spectral_norm(&d1.matmul(&pp)?.matmul(&d1)?)?;
            let cs = spectral_norm(&d2.matmul(&ss)?.matmul(&d2)?)?;
            total += value.max(0.0) / cp.max(cs).max(1.0);
        }
        Ok(total / trace)
    }
}

/// Adds a multiple of the identity until `a` is comfortably invertible; any
/// positive definite factor gives a valid upper bound.
fn regularized(mut a: CMatrix) -> Result<CMatrix> {
    let n = a.rows();
    let top = spectral_norm(&a)?.max(f64::MIN_POSITIVE);
    let mut shift = 1e-12 * top;
    while hermitian_power(&a, -0.5).is_err() {
        for i in 0..n {
            a[(i, i)] += C64::new(shift, 0.0);
        }
        shift *= 10.0;
    }
    Ok(a)
}

/// Bracket `[lower, upper]` on `‖z‖_{M_k(Z(Q))}` from the semidefinite
/// relaxation, or `None` when the source dimension is too large to list the
/// sign vectors. Functionals norming the inner factors are added as cuts for
/// a few rounds.
pub(crate) fn sdp_bracket(q: &QuotientMapData, z: &ZElement) -> Result<Option<(f64, f64)>> {
    if q.source_dim() > MAX_SOURCE_DIM || z.parts.is_empty() {
        return Ok(None);
    }
    let scale = z
        .parts
        .iter()
        .map(|(m, y)| Ok(ym_norm(q, *m, y)?.upper))
        .sum::<Result<f64>>()?;
    if scale == 0.0 {
        return Ok(Some((0.0, 0.0)));
    }
    let mut cuts: Vec<Vec<Vec<C64>>> = vec![Vec::new(); z.parts.len()];
    let (mut lower, mut upper) = (0.0_f64, f64::INFINITY);
    for _ in 0..CUT_ROUNDS {
        let prob = Problem::build(q, z, scale, &cuts)?;
        let (x, centred) = prob.solve()?;
        if let Some(tau) = centred {
            lower = lower.max(prob.dual_value(&x, tau).unwrap_or(0.0) * scale);
        }
        let (up, new_cuts) = prob.factor_upper(q, z, scale, &x)?;
        upper = upper.min(up * scale);
        if new_cuts.iter().all(Vec::is_empty) || upper <= lower * (1.0 + REL_GAP) {
            break;
        }
        for (c, n) in cuts.iter_mut().zip(new_cuts) {
            c.extend(n);
        }
    }
    Ok(Some((lower, upper)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vector, substream};

    fn element(seed: u64, k: usize, ms: &[u32]) -> ZElement {
        let q = QuotientMapData::sign_vectors(3).unwrap();
        let mut rng = substream(seed, 0);
        let parts = ms
            .iter()
            .map(|&m| (m, OsElement::from_flat(q.source(), k, &gaussian_vector(&mut rng, 4 * k * k, false)).unwrap()))
            .collect();
        ZElement::from_parts(k, 4, parts).unwrap()
    }

    #[test]
    fn first_level_is_the_sum() {
        let q = QuotientMapData::sign_vectors(3).unwrap();
        let z = element(3, 1, &[1, 4, 6]);
        let sum: f64 = z.parts().iter().map(|(m, y)| ym_norm(&q, *m, y).unwrap().upper).sum();
        let (lo, up) = sdp_bracket(&q, &z).unwrap().unwrap();
        assert!(lo <= up * (1.0 + 1e-9));
        assert!((lo - sum).abs() < 1e-5 * sum && (up - sum).abs() < 1e-5 * sum, "{lo} {up} {sum}");
    }

    #[test]
    fn matrix_level_bracket_is_tight() {
        let q = QuotientMapData::sign_vectors(3).unwrap();
        for (seed, ms) in [(1, vec![2, 5]), (2, vec![1, 3, 8]), (4, vec![4, 4, 7])] {
            let z = element(seed, 3, &ms);
            let (lo, up) = sdp_bracket(&q, &z).unwrap().unwrap();
            let parts = z.parts().iter().map(|(m, y)| ym_norm(&q, *m, y).unwrap().upper);
            let (largest, sum) = parts.fold((0.0_f64, 0.0), |(a, s), v| (a.max(v), s + v));
            assert!(largest <= up && up <= sum * (1.0 + 1e-9));
            // The remaining gap is the branch-and-bound slack of the inner
            // MIN(ℓ1) norms, well under a percent.
            assert!(lo <= up * (1.0 + 1e-9) && up - lo < 1e-2 * up, "{lo} {up}");
        }
    }
}
