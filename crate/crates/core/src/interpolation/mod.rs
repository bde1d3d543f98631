//! Certified complex interpolation for finite-dimensional norm couples.
//!
//! Upper bounds come from explicit analytic functions on the strip
//! `{0 <= Re z <= 1}` with `f(θ) = x`; lower bounds from analytic families of
//! functionals `g` with `g(θ) = ξ`, via subharmonicity of `log|⟨g, f⟩|`.

mod calderon;
mod dual;
mod lbfgs;
mod strip;

pub use calderon::{upper_calderon, AnalyticCandidate, CalderonResult};
pub use dual::{lower_dual_analytic, AnalyticDual};

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numerics::{hermitian_power, l2_norm, pairing, CMatrix, C64, ZERO};
use crate::opspaces::{HilbertNorm, NormCertificate, NormOracle};

/// Two norms on the same coordinates `ℂ^D`, with their duals when known.
#[derive(Debug)]
pub struct NormCouple {
    dim: usize,
    norms: [Box<dyn NormOracle>; 2],
    duals: [Option<Box<dyn NormOracle>>; 2],
}

impl NormCouple {
    pub fn new(norm0: Box<dyn NormOracle>, norm1: Box<dyn NormOracle>) -> Result<Self> {
        let dim = norm0.dim();
        if dim == 0 {
            return Err(Error::EmptyInput("couple dimension"));
        }
        if norm1.dim() != dim {
            return Err(Error::Shape(format!("couple dimensions {dim} and {}", norm1.dim())));
        }
        let duals = [norm0.dual(), norm1.dual()];
        Ok(Self {
            dim,
            norms: [norm0, norm1],
            duals,
        })
    }

    /// Hilbertian couple `‖x‖_j = (x* S_j x)^{1/2}`.
    pub fn hilbert(s0: CMatrix, s1: CMatrix) -> Result<Self> {
        Self::new(Box::new(HilbertNorm::new(s0)?), Box::new(HilbertNorm::new(s1)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self, edge: usize, x: &[C64]) -> Result<f64> {
        self.norms[edge].norm(x)
    }

    pub fn oracle(&self, edge: usize) -> &dyn NormOracle {
        self.norms[edge].as_ref()
    }

    pub fn dual_oracle(&self, edge: usize) -> Option<&dyn NormOracle> {
        self.duals[edge].as_deref()
    }

    fn check(&self, x: &[C64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Shape(format!("vector of length {} for couple of dimension {}", x.len(), self.dim)));
        }
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("interpolation input"));
        }
        Ok(())
    }
}

/// Solver budget for the analytic-function searches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    /// Modes `q = −Q..=Q` of the candidate family.
    pub modes: usize,
    /// Frequency spacing `Δ` between consecutive modes.
    pub spacing: f64,
    /// Boundary points per edge used while optimizing.
    pub opt_points: usize,
    /// Boundary points per edge used to certify the final bounds.
    pub cert_points: usize,
    /// L-BFGS iterations per continuation stage.
    pub iterations: usize,
    /// Also optimize an analytic family of functionals for the lower bound.
    pub dual: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            modes: 8,
            spacing: 0.25,
            opt_points: 72,
            cert_points: 16384,
            iterations: 150,
            dual: true,
        }
    }
}

impl Budget {
    /// Whether the grids are fine enough for the Bernstein margins to apply.
    pub fn is_usable(&self) -> bool {
        self.modes > 0
            && self.spacing > 0.0
            && self.spacing.is_finite()
            && self.opt_points > 2 * self.modes
            && self.cert_points > 2 * self.modes
            && self.iterations > 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpperKind {
    Geometric,
    Calderon,
}

impl UpperKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Geometric => "geometric",
            Self::Calderon => "calderon",
        }
    }
}

/// Bracket for `‖x‖_θ` with provenance of the upper bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpCertificate {
    pub theta: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub upper_kind: UpperKind,
    /// Discretization margin included in a Calderón upper bound.
    pub margin: f64,
    /// The Calderón search was skipped because the budget was unusable.
    pub fallback: bool,
    /// A lower bound exceeded an upper bound; the bracket was widened.
    pub violation: bool,
}

impl InterpCertificate {
    pub fn certificate(&self) -> NormCertificate {
        NormCertificate {
            lower: self.lower,
            upper: self.upper,
            exact: self.exact,
        }
    }

    fn exact(theta: f64, value: f64) -> Self {
        Self {
            theta,
            lower: value,
            upper: value,
            exact: true,
            upper_kind: UpperKind::Geometric,
            margin: 0.0,
            fallback: false,
            violation: false,
        }
    }
}

/// Lower bound `|⟨ξ, x⟩| / (‖ξ‖_{0*}^{1−θ} ‖ξ‖_{1*}^θ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub xi: Vec<C64>,
    pub pairing: f64,
    pub dual0: f64,
    pub dual1: f64,
    pub lower: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, 1]")));
    }
    Ok(())
}

/// `a^{1−θ} b^θ` with the endpoint conventions `θ = 0 → a`, `θ = 1 → b`.
pub(crate) fn geometric_mean(a: f64, b: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        a
    } else if theta == 1.0 {
        b
    } else {
        a.powf(1.0 - theta) * b.powf(theta)
    }
}

/// `‖x‖_0^{1−θ} ‖x‖_1^θ`, the bound from `f(z) = e^{λ(z−θ)} x`.
pub fn upper_geometric(x: &[C64], couple: &NormCouple, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    couple.check(x)?;
    Ok(geometric_mean(couple.norm(0, x)?, couple.norm(1, x)?, theta))
}

pub fn lower_dual(x: &[C64], couple: &NormCouple, theta: f64, xi: &[C64]) -> Result<DualCertificate> {
    check_theta(theta)?;
    couple.check(x)?;
    couple.check(xi)?;
    if xi.iter().all(|z| *z == ZERO) {
        return Err(Error::DegenerateCertificate);
    }
    let (d0, d1) = match (couple.dual_oracle(0), couple.dual_oracle(1)) {
        (Some(a), Some(b)) => (a.norm(xi)?, b.norm(xi)?),
        _ => return Err(Error::UnsupportedDescriptor("couple without dual norms".into())),
    };
    let denom = geometric_mean(d0, d1, theta);
    if !(denom > 0.0) {
        return Err(Error::DegenerateCertificate);
    }
    let p = pairing(xi, x).norm();
    Ok(DualCertificate {
        xi: xi.to_vec(),
        pairing: p,
        dual0: d0,
        dual1: d1,
        lower: p / denom,
    })
}

/// Functionals aligned with `x`: `conj(x)` and the norming functionals of
/// both endpoint norms.
fn dictionary(x: &[C64], couple: &NormCouple) -> Result<Vec<Vec<C64>>> {
    let mut out = vec![x.iter().map(|z| z.conj()).collect::<Vec<_>>()];
    for edge in 0..2 {
        let mut g = vec![ZERO; x.len()];
        couple.oracle(edge).norm_grad(x, &mut g)?;
        if l2_norm(&g) > 0.0 {
            out.push(g.iter().map(|z| z.conj()).collect());
        }
    }
    Ok(out)
}

/// Relative gap below which the bracket is reported as exact.
const EXACT_GAP: f64 = 1e-9;

/// Certified bracket for `‖x‖_θ` in the couple.
pub fn bracket(x: &[C64], couple: &NormCouple, theta: f64, budget: &Budget) -> Result<InterpCertificate> {
    check_theta(theta)?;
    couple.check(x)?;
    if x.iter().all(|z| *z == ZERO) {
        return Ok(InterpCertificate::exact(theta, 0.0));
    }
    if theta == 0.0 || theta == 1.0 {
        return Ok(InterpCertificate::exact(theta, couple.norm(theta as usize, x)?));
    }
    let geometric = upper_geometric(x, couple, theta)?;
    let mut lower = 0.0_f64;
    let mut best_xi: Option<Vec<C64>> = None;
    if couple.dual_oracle(0).is_some() && couple.dual_oracle(1).is_some() {
        for xi in dictionary(x, couple)? {
            match lower_dual(x, couple, theta, &xi) {
                Ok(c) if c.lower > lower => {
                    lower = c.lower;
                    best_xi = Some(xi);
                }
                Ok(_) | Err(Error::DegenerateCertificate) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let mut cert = InterpCertificate {
        theta,
        lower,
        upper: geometric,
        exact: false,
        upper_kind: UpperKind::Geometric,
        margin: 0.0,
        fallback: false,
        violation: false,
    };
    let closed = |c: &InterpCertificate| c.upper - c.lower <= EXACT_GAP * c.upper;
    if !closed(&cert) {
        let cal = upper_calderon(x, couple, theta, budget)?;
        cert.fallback = cal.fallback;
        if !cal.fallback && cal.upper < cert.upper {
            cert.upper = cal.upper;
            cert.upper_kind = UpperKind::Calderon;
            cert.margin = cal.margin;
        }
    }
    if !closed(&cert) && budget.dual {
        if let Some(xi) = best_xi {
            if let Some(d) = lower_dual_analytic(x, couple, theta, budget, &xi)? {
                cert.lower = cert.lower.max(d.lower);
            }
        }
    }
    if cert.lower > cert.upper * (1.0 + 1e-12) + crate::CERT_SLACK {
        cert.violation = true;
        core::mem::swap(&mut cert.lower, &mut cert.upper);
    }
    cert.lower = cert.lower.min(cert.upper);
    cert.exact = closed(&cert);
    Ok(cert)
}

/// `(x* S_θ x)^{1/2}` with `S_θ = S0^{1/2} (S0^{−1/2} S1 S0^{−1/2})^θ S0^{1/2}`.
pub fn hilbert_couple_exact(s0: &CMatrix, s1: &CMatrix, theta: f64, x: &[C64]) -> Result<f64> {
    check_theta(theta)?;
    if s0.rows() != s1.rows() || s0.cols() != s1.cols() || x.len() != s0.rows() {
        return Err(Error::Shape("Hilbert couple dimensions disagree".into()));
    }
    let half = hermitian_power(s0, 0.5)?;
    let inv_half = hermitian_power(s0, -0.5)?;
    let inner = crate::numerics::hermitian_part(&inv_half.matmul(s1)?.matmul(&inv_half)?)?;
    let st = half.matmul(&hermitian_power(&inner, theta)?)?.matmul(&half)?;
    let sx = st.matvec(x)?;
    let q: f64 = x.iter().zip(&sx).map(|(a, b)| (a.conj() * b).re).sum();
    Ok(q.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opspaces::row_couple;

    fn diag(w: &[f64]) -> CMatrix {
        CMatrix::from_fn(w.len(), w.len(), |i, j| if i == j { C64::new(w[i], 0.0) } else { ZERO })
    }

    fn lemma32_b(n: usize) -> Vec<C64> {
        let mut flat = vec![ZERO; n * n * n];
        for k in 0..n {
            flat[k * n * n + k * n] = C64::new(1.0, 0.0);
        }
        flat
    }

    #[test]
    fn hilbert_exact_examples() {
        let x = [C64::new(1.0, 0.0), ZERO];
        let v = hilbert_couple_exact(&diag(&[1.0, 4.0]), &diag(&[4.0, 1.0]), 0.5, &x).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-12);
        let y = [C64::new(3.0, 0.0), C64::new(0.0, 4.0)];
        let id = CMatrix::identity(2);
        assert!((hilbert_couple_exact(&id, &id, 0.3, &y).unwrap() - 5.0).abs() < 1e-12);
        let s0 = diag(&[2.0, 3.0]);
        assert!((hilbert_couple_exact(&s0, &id, 0.0, &y).unwrap() - (2.0 * 9.0 + 3.0 * 16.0f64).sqrt()).abs() < 1e-12);
        assert_eq!(hilbert_couple_exact(&diag(&[1.0, -1.0]), &id, 0.5, &y), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn geometric_endpoints_and_lemma_value() {
        let c = row_couple(4, 4);
        let b = lemma32_b(4);
        assert!((upper_geometric(&b, &c, 0.5).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((upper_geometric(&b, &c, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((upper_geometric(&b, &c, 1.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn proof_functional_lower_bound() {
        let c = row_couple(4, 4);
        let b = lemma32_b(4);
        let d = lower_dual(&b, &c, 0.5, &b).unwrap();
        assert!((d.pairing - 4.0).abs() < 1e-12);
        assert!((d.dual0 - 4.0).abs() < 1e-12 && (d.dual1 - 2.0).abs() < 1e-12);
        assert!((d.lower - 2f64.sqrt()).abs() < 1e-12);
        let zero = vec![ZERO; b.len()];
        assert_eq!(lower_dual(&b, &c, 0.5, &zero), Err(Error::DegenerateCertificate));
    }

    #[test]
    fn lemma_bracket_is_exact() {
        let c = row_couple(4, 4);
        let cert = bracket(&lemma32_b(4), &c, 0.25, &Budget::default()).unwrap();
        let target = 4f64.powf(0.125);
        assert!(cert.lower <= target + 1e-12 && cert.upper >= target - 1e-12);
        assert!(cert.exact && !cert.violation);
    }

    #[test]
    fn constant_couple_recovers_norm() {
        let mut r = crate::rng::seeded(5);
        let g = crate::rng::gaussian_matrix(&mut r, 3, 3, true);
        let s = g.matmul(&g.adjoint()).unwrap().add(&CMatrix::identity(3)).unwrap();
        let c = NormCouple::hilbert(s.clone(), s.clone()).unwrap();
        let x = crate::rng::gaussian_vector(&mut r, 3, true);
        let n = c.norm(0, &x).unwrap();
        let cert = bracket(&x, &c, 0.4, &Budget::default()).unwrap();
        assert!((cert.lower - n).abs() < 1e-6 && (cert.upper - n).abs() < 1e-6);
    }

    #[test]
    fn weighted_couple_calderon() {
        let c = NormCouple::hilbert(diag(&[1.0, 4.0]), diag(&[4.0, 1.0])).unwrap();
        let x = [C64::new(1.0, 0.0), ZERO];
        let r = upper_calderon(&x, &c, 0.5, &Budget::default()).unwrap();
        assert!(!r.fallback);
        assert!((r.upper / 2f64.sqrt() - 1.0).abs() < 0.01, "{r:?}");
    }

    #[test]
    fn unusable_budget_falls_back() {
        let c = NormCouple::hilbert(diag(&[1.0, 4.0]), diag(&[4.0, 1.0])).unwrap();
        let x = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let b = Budget {
            modes: 0,
            ..Budget::default()
        };
        let r = upper_calderon(&x, &c, 0.5, &b).unwrap();
        assert!(r.fallback);
        assert!((r.upper - upper_geometric(&x, &c, 0.5).unwrap()).abs() < 1e-15);
    }
}
