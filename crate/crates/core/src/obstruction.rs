//! The special column matrices behind the non-embeddability arguments for
//! `R`, `C` and `(R, R^op)_θ`, the exact interpolation values they attain, and
//! the growth inequality `D n^{γ/2} <= 2 L r n^{θ/2} + L`.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::interpolation::Budget;
use crate::numerics::{CMatrix, C64, ZERO};
use crate::opspaces::{distance, norm, norm_with_budget, NormCertificate, OsDescriptor, OsElement};

/// `a_j` carries `r e_{1,2j−1}` at outer position `(j, 1)`, `b_j` carries
/// `r e_{1,2j}` there; `c = Σ a_j`, `d = Σ b_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialMatrices {
    pub n: usize,
    pub r: f64,
    pub a: Vec<OsElement>,
    pub b: Vec<OsElement>,
    pub c: OsElement,
    pub d: OsElement,
}

/// Certified norms of the special matrices (`a`, `b`, `a − b` are maxima over `j`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecialNorms {
    pub a: NormCertificate,
    pub b: NormCertificate,
    pub a_minus_b: NormCertificate,
    pub c: NormCertificate,
    pub d: NormCertificate,
    pub c_minus_d: NormCertificate,
}

fn column_element(space: OsDescriptor, n: usize, r: f64, pick: impl Fn(usize) -> Option<usize>) -> Result<OsElement> {
    let mut coords: Vec<CMatrix> = (0..space.dim()).map(|_| CMatrix::zeros(n, n)).collect();
    for j in 0..n {
        if let Some(k) = pick(j) {
            coords[k][(j, 0)] = C64::new(r, 0.0);
        }
    }
    OsElement::new(space, n, coords)
}

pub fn build_special(n: usize, r: f64, space: OsDescriptor) -> Result<SpecialMatrices> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidParameter("r must be finite and nonnegative".into()));
    }
    if space.dim() < 2 * n {
        return Err(Error::Truncation {
            needed: 2 * n,
            have: space.dim(),
        });
    }
    let single = |j: usize, offset: usize| column_element(space, n, r, |i| (i == j).then_some(2 * j + offset));
    let a = (0..n).map(|j| single(j, 0)).collect::<Result<Vec<_>>>()?;
    let b = (0..n).map(|j| single(j, 1)).collect::<Result<Vec<_>>>()?;
    Ok(SpecialMatrices {
        n,
        r,
        a,
        b,
        c: column_element(space, n, r, |j| Some(2 * j))?,
        d: column_element(space, n, r, |j| Some(2 * j + 1))?,
    })
}

impl SpecialMatrices {
    pub fn norms(&self) -> Result<SpecialNorms> {
        let max_over = |xs: &[OsElement], ys: Option<&[OsElement]>| -> Result<NormCertificate> {
            let mut acc = NormCertificate::exact(0.0);
            for (j, x) in xs.iter().enumerate() {
                let c = match ys {
                    Some(ys) => distance(x, &ys[j])?,
                    None => norm(x)?,
                };
                acc = acc.max(&c);
            }
            Ok(acc)
        };
        Ok(SpecialNorms {
            a: max_over(&self.a, None)?,
            b: max_over(&self.b, None)?,
            a_minus_b: max_over(&self.a, Some(&self.b))?,
            c: norm(&self.c)?,
            d: norm(&self.d)?,
            c_minus_d: distance(&self.c, &self.d)?,
        })
    }
}

/// The column matrix `[e_{1,1}; …; e_{1,n}]` in `M_n` of a space with `d >= n`
/// coordinates.
pub fn lemma32_element(n: usize, space: OsDescriptor) -> Result<OsElement> {
    if space.dim() < n {
        return Err(Error::Truncation { needed: n, have: space.dim() });
    }
    column_element(space, n, 1.0, Some)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma32Row {
    pub n: usize,
    pub theta: f64,
    /// `n^{θ/2}`.
    pub target: f64,
    pub dual_lower: f64,
    pub upper: f64,
    pub width: f64,
}

/// Brackets `‖[e_{1,1}; …; e_{1,n}]‖_{M_n((R, R^op)_θ)}` for each `(n, θ)`.
/// A bracket that misses `n^{θ/2}` by more than `1e-9` relative is an error.
pub fn lemma32_table(ns: &[usize], thetas: &[f64], budget: &Budget) -> Result<Vec<Lemma32Row>> {
    let mut rows = Vec::with_capacity(ns.len() * thetas.len());
    for &n in ns {
        for &theta in thetas {
            rows.push(lemma32_row(n, theta, budget)?);
        }
    }
    Ok(rows)
}

pub fn lemma32_row(n: usize, theta: f64, budget: &Budget) -> Result<Lemma32Row> {
    let x = lemma32_element(n, OsDescriptor::InterpRc { d: n, theta })?;
    let cert = norm_with_budget(&x, budget)?;
    let target = (n as f64).powf(0.5 * theta);
    let tol = 1e-9 * target;
    if !cert.contains(target, tol) {
        return Err(Error::BracketExcludesTarget {
            n,
            theta,
            lower: cert.lower,
            upper: cert.upper,
            target,
        });
    }
    Ok(Lemma32Row {
        n,
        theta,
        target,
        dual_lower: cert.lower,
        upper: cert.upper,
        width: cert.width(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstructionRow {
    pub n: usize,
    /// `D n^{γ/2}`.
    pub lhs: f64,
    /// `2 L r n^{θ/2} + L`.
    pub rhs: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub rows: Vec<ObstructionRow>,
    /// Least `n` in range with `lhs > rhs`.
    pub first_violation: Option<usize>,
    /// `ceil(((2Lr + L)/D)^{2/(γ−θ)})`.
    pub closed_form: f64,
    /// The closed form lies beyond the scanned range.
    pub closed_form_beyond_range: bool,
}

/// `ceil(((2Lr + L)/D)^{2/(γ−θ)})`, computed in floating point.
pub fn growth_closed_form(theta: f64, gamma: f64, r: f64, d: f64, l: f64) -> f64 {
    ((2.0 * l * r + l) / d).powf(2.0 / (gamma - theta)).ceil()
}

pub fn growth_obstruction(theta: f64, gamma: f64, r: f64, d: f64, l: f64, ns: core::ops::RangeInclusive<usize>) -> Result<GrowthReport> {
    if !(theta < gamma) {
        return Err(Error::Ordering { theta, gamma });
    }
    if !(r > 0.0 && d > 0.0 && l > 0.0) || !(r.is_finite() && d.is_finite() && l.is_finite()) {
        return Err(Error::InvalidParameter("r, D and L must be positive and finite".into()));
    }
    let rows: Vec<ObstructionRow> = ns
        .clone()
        .map(|n| {
            let nf = n as f64;
            let lhs = d * nf.powf(0.5 * gamma);
            let rhs = 2.0 * l * r * nf.powf(0.5 * theta) + l;
            ObstructionRow {
                n,
                lhs,
                rhs,
                violated: lhs > rhs,
            }
        })
        .collect();
    let first_violation = rows.iter().find(|row| row.violated).map(|row| row.n);
    let closed_form = growth_closed_form(theta, gamma, r, d, l);
    Ok(GrowthReport {
        rows,
        first_violation,
        closed_form,
        closed_form_beyond_range: closed_form > *ns.end() as f64,
    })
}

/// `(1 − θ, 1 − γ)`: the pair to scan when `θ > γ`, using
/// `(R, R^op)_θ ≡ (R^op, R)_{1−θ}`.
pub fn symmetric_reduction(theta: f64, gamma: f64) -> (f64, f64) {
    (1.0 - theta, 1.0 - gamma)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceRow {
    pub n: usize,
    /// `(Σ_j ‖y_j‖²)^{1/2}` with `y_j = f(r e_{1,2j−1}) − f(r e_{1,2j})`.
    pub stacked: f64,
    /// `‖f_n(c_n) − f_n(d_n)‖_{M_n(target)}`.
    pub distance_cd: NormCertificate,
    /// `min_j ‖y_j‖`: a witness for `ρ_f(√2 r)`.
    pub rho_witness: f64,
    /// `√n · rho_witness`.
    pub sqrt_n_rho: f64,
    /// `max_j ‖y_j‖`: a lower estimate of `ω_f(√2 r)` at the first level.
    pub omega_side: f64,
}

/// Pushes the special matrices through the amplifications of an `X`-level
/// map. The target must be column-like at level 1 so that `‖y_j‖` is the
/// Euclidean norm.
pub fn prop31_divergence(
    ns: &[usize],
    r: f64,
    source: OsDescriptor,
    target: OsDescriptor,
    f: impl Fn(&[C64]) -> Result<Vec<C64>>,
) -> Result<Vec<DivergenceRow>> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let sp = build_special(n, r, source.with_dim(source.dim().max(2 * n)))?;
        let tgt = target.with_dim(target.dim().max(2 * n));
        let src_dim = sp.c.space().dim();
        let mut ys = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![ZERO; src_dim];
            e[2 * j] = C64::new(r, 0.0);
            let fa = f(&e)?;
            e[2 * j] = ZERO;
            e[2 * j + 1] = C64::new(r, 0.0);
            let fb = f(&e)?;
            if fa.len() != tgt.dim() || fb.len() != tgt.dim() {
                return Err(Error::Shape("candidate output does not match the target dimension".into()));
            }
            ys.push(fa.iter().zip(&fb).map(|(p, q)| p - q).collect::<Vec<C64>>());
        }
        let norms: Vec<f64> = ys.iter().map(|y| crate::numerics::l2_norm(y)).collect();
        let stacked = norms.iter().map(|v| v * v).sum::<f64>().sqrt();
        let fc = sp.c.amplify(tgt, |x| f(x))?;
        let fd = sp.d.amplify(tgt, |x| f(x))?;
        let rho = norms.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(DivergenceRow {
            n,
            stacked,
            distance_cd: distance(&fc, &fd)?,
            rho_witness: rho,
            sqrt_n_rho: (n as f64).sqrt() * rho,
            omega_side: norms.iter().copied().fold(0.0, f64::max),
        });
    }
    Ok(rows)
}

/// The coordinate identity `R → C`: the candidate whose amplifications turn
/// the special columns into their transposes' norms.
pub fn transpose_candidate(x: &[C64]) -> Result<Vec<C64>> {
    Ok(x.to_vec())
}
