//! Positively homogeneous maps, sections of `Q̃` and the `g`/`h` pair.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{z_norm, QuotientMapData, ZElement, ZVector};
use crate::error::{Error, Result};
use crate::numerics::C64;
use crate::opspaces::{norm, NormCertificate, OsDescriptor, OsElement};

/// Values a homogeneous map may take.
pub trait MapValue: Clone {
    fn scaled(&self, s: f64) -> Self;
    fn max_abs_diff(&self, other: &Self) -> Result<f64>;
    fn magnitude(&self) -> f64;
}

impl MapValue for Vec<C64> {
    fn scaled(&self, s: f64) -> Self {
        self.iter().map(|z| z * s).collect()
    }

    fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!("{} vs {} coordinates", self.len(), other.len())));
        }
        Ok(self.iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    fn magnitude(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl MapValue for ZVector {
    fn scaled(&self, s: f64) -> Self {
        ZVector::scaled(self, s)
    }

    fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        ZVector::max_abs_diff(self, other)
    }

    fn magnitude(&self) -> f64 {
        self.parts().values().flat_map(|v| v.iter().map(|z| z.norm())).fold(0.0, f64::max)
    }
}

type Rule<V> = Arc<dyn Fn(&[C64]) -> Result<V> + Send + Sync>;

/// A map `X → V` with `f(αx) = αf(x)` for `α >= 0`.
pub struct HomogeneousMap<V> {
    source: OsDescriptor,
    rule: Rule<V>,
}

impl<V> Clone for HomogeneousMap<V> {
    fn clone(&self) -> Self {
        Self {
            source: self.source,
            rule: Arc::clone(&self.rule),
        }
    }
}

impl<V> fmt::Debug for HomogeneousMap<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousMap").field("source", &self.source).finish_non_exhaustive()
    }
}

impl<V: MapValue> HomogeneousMap<V> {
    /// Wraps a rule that is already positively homogeneous (a linear map, say).
    pub fn from_homogeneous(source: OsDescriptor, rule: impl Fn(&[C64]) -> Result<V> + Send + Sync + 'static) -> Self {
        Self {
            source,
            rule: Arc::new(rule),
        }
    }

    pub fn source(&self) -> OsDescriptor {
        self.source
    }

    pub fn eval(&self, x: &[C64]) -> Result<V> {
        if x.len() != self.source.dim() {
            return Err(Error::Shape(format!("{} coordinates for {}", x.len(), self.source.name())));
        }
        (self.rule)(x)
    }
}

impl HomogeneousMap<Vec<C64>> {
    /// `f_k` into `target`.
    pub fn amplify(&self, x: &OsElement, target: OsDescriptor) -> Result<OsElement> {
        x.amplify(target, |v| self.eval(v))
    }
}

impl HomogeneousMap<ZVector> {
    /// `f_k` into `M_k(Z(Q))` with `dim`-dimensional summands.
    pub fn amplify(&self, x: &OsElement, dim: usize) -> Result<ZElement> {
        ZElement::from_entries(x.n(), dim, |i, j| self.eval(&x.entry(i, j)))
    }
}

/// First-level norm; refuses descriptors whose first level is only bracketed.
pub(crate) fn point_norm(space: OsDescriptor, x: &[C64]) -> Result<f64> {
    let cert = norm(&OsElement::from_flat(space, 1, x)?)?;
    if cert.width() > 1e-12 * cert.upper.max(1.0) {
        return Err(Error::UnsupportedDescriptor(format!("{} (first-level norm is not exact)", space.name())));
    }
    Ok(cert.upper)
}

/// `f(0) = 0`, `f(x) = ‖x‖ s(x/‖x‖)` from a rule `s` on the unit sphere.
pub fn homogeneous_extension<V>(
    source: OsDescriptor,
    zero: V,
    sphere_rule: impl Fn(&[C64]) -> Result<V> + Send + Sync + 'static,
) -> Result<HomogeneousMap<V>>
where
    V: MapValue + Send + Sync + 'static,
{
    source.validate()?;
    Ok(HomogeneousMap::from_homogeneous(source, move |x| {
        let r = point_norm(source, x)?;
        if r == 0.0 {
            return Ok(zero.clone());
        }
        let u: Vec<C64> = x.iter().map(|z| z / r).collect();
        Ok(sphere_rule(&u)?.scaled(r))
    }))
}

/// Largest relative defect `|f(αx) − αf(x)|` over `(x, α)` samples.
pub fn homogeneity_defect<V: MapValue>(f: &HomogeneousMap<V>, samples: &[(Vec<C64>, f64)]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (x, alpha) in samples {
        if *alpha < 0.0 {
            return Err(Error::InvalidParameter(format!("negative scalar {alpha}")));
        }
        let fx = f.eval(x)?;
        let scaled: Vec<C64> = x.iter().map(|z| z * alpha).collect();
        let fax = f.eval(&scaled)?;
        let d = fax.max_abs_diff(&fx.scaled(*alpha))?;
        worst = worst.max(d / (alpha * fx.magnitude()).max(1.0));
    }
    Ok(worst)
}

/// Smallest `m >= 1` with `2^{−m+1} C k² <= ε`.
pub fn section_level(c: f64, k: usize, eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps.is_finite()) || !(c > 0.0 && c.is_finite()) || k == 0 {
        return Err(Error::InvalidParameter(format!("section level for C = {c}, k = {k}, eps = {eps}")));
    }
    let need = c * (k * k) as f64;
    (1..1000u32)
        .find(|&m| 0.5_f64.powi(m as i32 - 1) * need <= eps)
        .ok_or_else(|| Error::InvalidParameter(format!("eps = {eps} is below the representable range")))
}

/// A homogeneous section of `Q̃` into the single summand `Y_m`.
#[derive(Clone, Debug)]
pub struct ZSection {
    pub k: usize,
    pub eps: f64,
    pub m: u32,
    quotient: Arc<QuotientMapData>,
    map: HomogeneousMap<ZVector>,
}

impl ZSection {
    pub fn quotient(&self) -> &QuotientMapData {
        &self.quotient
    }

    pub fn map(&self) -> &HomogeneousMap<ZVector> {
        &self.map
    }

    pub fn eval(&self, x: &[C64]) -> Result<ZVector> {
        self.map.eval(x)
    }

    pub fn amplify(&self, x: &OsElement) -> Result<ZElement> {
        self.map.amplify(x, self.quotient.source_dim())
    }

    /// `max |Q̃_k f_k(x̄) − x̄|` entrywise.
    pub fn residual(&self, x: &OsElement) -> Result<f64> {
        let back = self.amplify(x)?.q_tilde(&self.quotient)?;
        Ok(back.sub(x)?.coords().iter().map(|c| c.max_abs()).fold(0.0, f64::max))
    }
}

/// The section built from minimum-ℓ1 preimages, homogeneously extended and
/// placed in `Y_m` for the smallest admissible `m`.
pub fn section_into_z(q: Arc<QuotientMapData>, k: usize, eps: f64) -> Result<ZSection> {
    let m = section_level(q.section_bound(), k, eps)?;
    let inner = Arc::clone(&q);
    let map = homogeneous_extension(q.target(), ZVector::zero(), move |x| Ok(ZVector::single(m, inner.preimage(x)?)))?;
    Ok(ZSection {
        k,
        eps,
        m,
        quotient: q,
        map,
    })
}

/// Sampled `‖f_k‖^ε` ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsNormEstimate {
    pub eps: f64,
    /// Certified lower bound: numerator lower over denominator upper.
    pub lower: f64,
    /// Numerator upper over denominator lower: the pessimistic side.
    pub conservative: f64,
    pub pairs: usize,
    pub worst: Option<usize>,
}

/// `max ‖f_k(x̄) − f_k(ȳ)‖ / max{‖x̄ − ȳ‖, ε‖x̄‖, ε‖ȳ‖}` over pairs, with
/// both bracket sides tracked. Pairs of zeros are skipped.
pub fn eps_norm_estimate<T>(
    pairs: &[(OsElement, OsElement)],
    eps: f64,
    mut eval: impl FnMut(&OsElement) -> Result<T>,
    mut distance: impl FnMut(&T, &T) -> Result<NormCertificate>,
) -> Result<EpsNormEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps}")));
    }
    let mut out = EpsNormEstimate {
        eps,
        lower: 0.0,
        conservative: 0.0,
        pairs: 0,
        worst: None,
    };
    for (idx, (x, y)) in pairs.iter().enumerate() {
        if x.is_zero() && y.is_zero() {
            continue;
        }
        let nx = norm(x)?.scale(eps);
        let ny = norm(y)?.scale(eps);
        let d = norm(&x.sub(y)?)?;
        let den = d.max(&nx).max(&ny);
        let num = distance(&eval(x)?, &eval(y)?)?;
        out.pairs += 1;
        let lo = if den.upper > 0.0 { num.lower / den.upper } else { 0.0 };
        let hi = if den.lower > 0.0 {
            num.upper / den.lower
        } else if num.upper > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if lo > out.lower || out.worst.is_none() {
            out.lower = out.lower.max(lo);
            out.worst = Some(idx);
        }
        out.conservative = out.conservative.max(hi);
    }
    Ok(out)
}

/// `g(y) = (Q̃y, y − f(Q̃y))` and `h(x, z) = z + f(x)` for the section `f`
/// built with `ε = e^{−k}`.
#[derive(Clone, Debug)]
pub struct EquivalenceMaps {
    section: ZSection,
}

impl EquivalenceMaps {
    pub fn new(q: Arc<QuotientMapData>, k: usize) -> Result<Self> {
        Ok(Self {
            section: section_into_z(q, k, (-(k as f64)).exp())?,
        })
    }

    pub fn section(&self) -> &ZSection {
        &self.section
    }

    pub fn g(&self, y: &ZElement) -> Result<(OsElement, ZElement)> {
        let x = y.q_tilde(self.section.quotient())?;
        let lifted = self.section.amplify(&x)?;
        Ok((x, y.sub(&lifted)?))
    }

    pub fn h(&self, x: &OsElement, z: &ZElement) -> Result<ZElement> {
        z.add(&self.section.amplify(x)?)
    }

    /// `max |Q̃_k z|`, zero on `ker Q̃`.
    pub fn kernel_residual(&self, z: &ZElement) -> Result<f64> {
        Ok(z.q_tilde(self.section.quotient())?
            .coords()
            .iter()
            .map(|c| c.max_abs())
            .fold(0.0, f64::max))
    }

    /// `‖g_k(ȳ) − g_k(z̄)‖` in the max-sum `X ⊕ ker Q̃`.
    pub fn g_displacement(&self, y: &ZElement, z: &ZElement) -> Result<NormCertificate> {
        let (xa, ka) = self.g(y)?;
        let (xb, kb) = self.g(z)?;
        super::sum_norm(self.section.quotient(), &xa.sub(&xb)?, &ka.sub(&kb)?)
    }

    pub fn z_distance(&self, y: &ZElement, z: &ZElement) -> Result<NormCertificate> {
        z_norm(self.section.quotient(), &y.sub(z)?)
    }
}
