//! Families of sections indexed by log-radius and their spherical gluing.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::maps::{eps_norm_estimate, section_into_z, HomogeneousMap};
use super::{z_norm, QuotientMapData, ZElement, ZVector};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64};
use crate::opspaces::{norm, OsDescriptor, OsElement};

/// Relative tolerance for witness identities.
const WITNESS_TOL: f64 = 1e-9;

/// Sections `f^n` with `ε = e^{−2n}` for `n = 0..=t_max`, all at level `k`.
pub fn lemma59_nodes(q: Arc<QuotientMapData>, k: usize, t_max: usize) -> Result<Family> {
    let dim = q.source_dim();
    let nodes = (0..=t_max)
        .map(|n| Ok(section_into_z(Arc::clone(&q), k, (-2.0 * n as f64).exp())?.map().clone()))
        .collect::<Result<Vec<_>>>()?;
    Family::interpolate(nodes, dim)
}

/// `(f^t)_{t >= 0}`: piecewise-linear in `t` between integer nodes, equal to
/// the first node for `t <= 0` and to the last node beyond the grid.
#[derive(Clone, Debug)]
pub struct Family {
    nodes: Vec<HomogeneousMap<ZVector>>,
    dim: usize,
    constant_tail: bool,
}

impl Family {
    pub fn interpolate(nodes: Vec<HomogeneousMap<ZVector>>, dim: usize) -> Result<Self> {
        let first = nodes.first().ok_or(Error::EmptyInput("family nodes"))?.source();
        if nodes.iter().any(|f| f.source() != first) {
            return Err(Error::Shape("family nodes have different sources".into()));
        }
        Ok(Self {
            nodes,
            dim,
            constant_tail: false,
        })
    }

    /// `f^t ≡ f` for every `t`.
    pub fn constant(map: HomogeneousMap<ZVector>, dim: usize) -> Self {
        Self {
            nodes: alloc::vec![map],
            dim,
            constant_tail: true,
        }
    }

    pub fn source(&self) -> OsDescriptor {
        self.nodes[0].source()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Last integer node.
    pub fn t_max(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Whether `t` lies past the last node of a non-constant family.
    pub fn beyond_grid(&self, t: f64) -> bool {
        !self.constant_tail && t > self.t_max() as f64
    }

    pub fn value(&self, t: f64, x: &[C64]) -> Result<ZVector> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("log-radius {t}")));
        }
        if t <= 0.0 {
            return self.nodes[0].eval(x);
        }
        if t >= self.t_max() as f64 {
            return self.nodes[self.t_max()].eval(x);
        }
        let n = t.floor() as usize;
        let s = t - n as f64;
        let lo = self.nodes[n].eval(x)?;
        if s == 0.0 {
            return Ok(lo);
        }
        lo.combine(1.0 - s, &self.nodes[n + 1].eval(x)?, s)
    }

    pub fn amplify(&self, t: f64, x: &OsElement) -> Result<ZElement> {
        ZElement::from_entries(x.n(), self.dim, |i, j| self.value(t, &x.entry(i, j)))
    }
}

/// Output of the glued map at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct GlueEval {
    pub value: ZElement,
    pub radius: f64,
    /// Index of the witness used: `0` on the unit ball, `log‖x̄‖` outside.
    pub t: f64,
    /// The log-radius fell past the family's last node.
    pub beyond_grid: bool,
}

/// `F(x̄) = 0` at zero, `[f^0(x_ij)]` on the unit ball and
/// `[f^{log‖x̄‖}(x_ij)]` outside, at matrix level `k`.
#[derive(Clone, Debug)]
pub struct SphericalAmplification {
    family: Family,
    pub k: usize,
    pub big_k: f64,
}

impl SphericalAmplification {
    pub fn glue(family: Family, k: usize, big_k: f64) -> Result<Self> {
        if k == 0 || !(big_k > 0.0) {
            return Err(Error::InvalidParameter(format!("gluing at level {k} with K = {big_k}")));
        }
        Ok(Self { family, k, big_k })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn source(&self) -> OsDescriptor {
        self.family.source()
    }

    /// Log-radius of the witness attached to the sphere of radius `r`.
    pub fn witness_index(r: f64) -> f64 {
        if r <= 1.0 {
            0.0
        } else {
            r.ln()
        }
    }

    /// `f^r(x)`: the witness for the sphere of radius `r`.
    pub fn witness_value(&self, r: f64, x: &[C64]) -> Result<ZVector> {
        self.family.value(Self::witness_index(r), x)
    }

    pub fn eval(&self, x: &OsElement) -> Result<GlueEval> {
        if x.n() != self.k || x.space() != self.source() {
            return Err(Error::Shape(format!(
                "glued map acts on M_{}({}), got M_{}({})",
                self.k,
                self.source().name(),
                x.n(),
                x.space().name()
            )));
        }
        if x.is_zero() {
            return Ok(GlueEval {
                value: ZElement::zeros(self.k, self.family.dim),
                radius: 0.0,
                t: 0.0,
                beyond_grid: false,
            });
        }
        let cert = norm(x)?;
        if cert.width() > 1e-12 * cert.upper.max(1.0) {
            return Err(Error::UnsupportedDescriptor(format!("{} (radius must be exact)", x.space().name())));
        }
        let radius = cert.upper;
        let t = Self::witness_index(radius);
        Ok(GlueEval {
            value: self.family.amplify(t, x)?,
            radius,
            t,
            beyond_grid: self.family.beyond_grid(t),
        })
    }
}

/// Sampled evidence for the two gluing hypotheses, from below.
#[derive(Clone, Debug, PartialEq)]
pub struct GluingHypotheses {
    /// `max_t` of the sampled `‖f^t_k‖^{e^{−2t}}` lower bounds.
    pub eps_norm: f64,
    /// `max ‖f^t_k(x̄) − f^s_k(x̄)‖ / (|t − s| ‖x̄‖)` over samples.
    pub t_lipschitz: f64,
}

impl GluingHypotheses {
    pub fn holds(&self, big_k: f64) -> bool {
        self.eps_norm <= big_k * (1.0 + 1e-6) && self.t_lipschitz <= big_k * (1.0 + 1e-6)
    }
}

pub fn check_gluing_hypotheses(
    q: &QuotientMapData,
    family: &Family,
    ts: &[f64],
    pairs: &[(OsElement, OsElement)],
) -> Result<GluingHypotheses> {
    if ts.is_empty() {
        return Err(Error::EmptyInput("log-radius samples"));
    }
    if q.source_dim() != family.dim || q.target() != family.source() {
        return Err(Error::Shape("family does not map into Z(Q)".into()));
    }
    let mut eps_norm = 0.0_f64;
    for &t in ts {
        let est = eps_norm_estimate(pairs, (-2.0 * t).exp(), |x| family.amplify(t, x), |a, b| {
            z_norm(q, &a.sub(b)?)
        })?;
        eps_norm = eps_norm.max(est.lower);
    }
    let mut t_lipschitz = 0.0_f64;
    for (i, &t) in ts.iter().enumerate() {
        for &s in &ts[i + 1..] {
            if t == s {
                continue;
            }
            for (x, _) in pairs {
                let r = norm(x)?.upper;
                if r == 0.0 {
                    continue;
                }
                let d = z_norm(q, &family.amplify(t, x)?.sub(&family.amplify(s, x)?)?)?;
                t_lipschitz = t_lipschitz.max(d.lower / ((t - s).abs() * r));
            }
        }
    }
    Ok(GluingHypotheses { eps_norm, t_lipschitz })
}

/// One probe of witness uniqueness.
#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessSample {
    pub r: f64,
    /// `max |A^r(x) − B^r(x)|`.
    pub diff: f64,
    pub a_reproduces: bool,
    pub b_reproduces: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessReport {
    pub samples: Vec<UniquenessSample>,
    pub counterexample: Option<usize>,
}

impl UniquenessReport {
    pub fn agree(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// For each `(r, x)` with `x ∈ r·B_X`, evaluates `F` on `diag(x, y)` where
/// `y ∈ M_{k−1}(X)` has norm exactly `r`, checks that each witness family
/// reproduces every entry of the result, and compares `A^r(x)` with `B^r(x)`.
pub fn spherical_uniqueness_check<A, B>(
    f: &SphericalAmplification,
    a: A,
    b: B,
    points: &[(f64, Vec<C64>)],
) -> Result<UniquenessReport>
where
    A: Fn(f64, &[C64]) -> Result<ZVector>,
    B: Fn(f64, &[C64]) -> Result<ZVector>,
{
    if f.k < 2 {
        return Err(Error::InvalidParameter("witness uniqueness needs matrix level k > 1".into()));
    }
    let space = f.source();
    let d = space.dim();
    let mut samples = Vec::with_capacity(points.len());
    let mut counterexample = None;
    for (idx, (r, x)) in points.iter().enumerate() {
        let r = *r;
        let rx = super::maps::point_norm(space, x)?;
        if !(r > 0.0) || rx > r * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("point of norm {rx} is outside the ball of radius {r}")));
        }
        // Companion r·e_0 in the (1,1) slot: the block diagonal has norm r.
        let mut coords: Vec<CMatrix> = (0..d).map(|_| CMatrix::zeros(f.k, f.k)).collect();
        for (c, z) in x.iter().enumerate() {
            coords[c][(0, 0)] = *z;
        }
        coords[0][(1, 1)] = C64::new(r, 0.0);
        let xbar = OsElement::new(space, f.k, coords)?;
        let glued = f.eval(&xbar)?;
        let tol = WITNESS_TOL * r.max(1.0);
        let reproduces = |w: &dyn Fn(f64, &[C64]) -> Result<ZVector>| -> Result<bool> {
            for i in 0..f.k {
                for j in 0..f.k {
                    if w(r, &xbar.entry(i, j))?.max_abs_diff(&glued.value.entry(i, j))? > tol {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        };
        let sample = UniquenessSample {
            r,
            diff: a(r, x)?.max_abs_diff(&b(r, x)?)?,
            a_reproduces: reproduces(&a)?,
            b_reproduces: reproduces(&b)?,
        };
        if counterexample.is_none() && (sample.diff > tol || !sample.a_reproduces || !sample.b_reproduces) {
            counterexample = Some(idx);
        }
        samples.push(sample);
    }
    Ok(UniquenessReport { samples, counterexample })
}
