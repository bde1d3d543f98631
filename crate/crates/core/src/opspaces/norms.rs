use alloc::boxed::Box;
use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt::Debug;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{NormCertificate, OsDescriptor, OsElement};
use crate::error::{Error, Result};
use crate::interpolation::{self, Budget, NormCouple};
use crate::numerics::{
    hermitian_power, kron, nuclear_norm, spectral_norm, svd, top_singular_triplet, CMatrix, C64, ZERO,
};
use crate::rng;

/// A norm on flattened coordinates `ℂ^D` with a (sub)gradient.
///
/// Gradients follow the convention `d‖x‖ = Re Σ_c conj(G_c) dx_c`, so
/// `Σ_c conj(G_c) x_c = ‖x‖` and `conj(G)` is a norming functional under the
/// bilinear pairing `⟨ξ, x⟩ = Σ_c ξ_c x_c`.
pub trait NormOracle: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn norm(&self, x: &[C64]) -> Result<f64>;
    fn norm_grad(&self, x: &[C64], grad: &mut [C64]) -> Result<f64>;
    /// Dual norm under the bilinear pairing, when available in closed form.
    fn dual(&self) -> Option<Box<dyn NormOracle>>;
    /// A constant `L` with `‖x‖ <= L ‖x‖_2`.
    fn l2_bound(&self) -> f64;
}

/// Linear placement of flat coordinates into a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    rows: usize,
    cols: usize,
    pos: Vec<Option<(usize, usize)>>,
}

impl Embedding {
    fn build(n: usize, d: usize, rows: usize, cols: usize, f: impl Fn(usize, usize, usize) -> (usize, usize)) -> Self {
        let mut pos = Vec::with_capacity(d * n * n);
        for k in 0..d {
            for i in 0..n {
                for j in 0..n {
                    pos.push(Some(f(k, i, j)));
                }
            }
        }
        Self { rows, cols, pos }
    }

    /// `M_n(Row(d))` as `n x nd` matrices: `M[i, j d + k] = (A_k)_ij`.
    pub fn row(n: usize, d: usize) -> Self {
        Self::build(n, d, n, n * d, |k, i, j| (i, j * d + k))
    }

    /// `M_n(Column(d))` as `nd x n` matrices: `M[i d + k, j] = (A_k)_ij`.
    pub fn column(n: usize, d: usize) -> Self {
        Self::build(n, d, n * d, n, |k, i, j| (i * d + k, j))
    }

    /// Row embedding of the outer transpose.
    pub fn row_op(n: usize, d: usize) -> Self {
        Self::build(n, d, n, n * d, |k, i, j| (j, i * d + k))
    }

    /// Column embedding of the outer transpose.
    pub fn column_op(n: usize, d: usize) -> Self {
        Self::build(n, d, n * d, n, |k, i, j| (j * d + k, i))
    }

    /// Only coordinate block `k` (of `d`), as an `n x n` matrix.
    pub fn coordinate(n: usize, d: usize, k: usize) -> Self {
        let mut pos = vec![None; d * n * n];
        for i in 0..n {
            for j in 0..n {
                pos[k * n * n + i * n + j] = Some((i, j));
            }
        }
        Self { rows: n, cols: n, pos }
    }

    pub fn for_descriptor(space: OsDescriptor, n: usize) -> Option<Self> {
        let d = space.dim();
        match space {
            OsDescriptor::Row(_) | OsDescriptor::ColumnOp(_) => Some(Self::row(n, d)),
            OsDescriptor::Column(_) | OsDescriptor::RowOp(_) => Some(Self::column(n, d)),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.pos.len()
    }

    pub fn assemble(&self, x: &[C64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for (p, &z) in self.pos.iter().zip(x) {
            if let Some(rc) = *p {
                m[rc] = z;
            }
        }
        m
    }

    /// Adjoint of `assemble` with respect to the real pairing.
    pub fn pull_back(&self, m: &CMatrix, out: &mut [C64]) {
        for (p, g) in self.pos.iter().zip(out.iter_mut()) {
            *g = p.map_or(ZERO, |rc| m[rc]);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Spectral,
    Nuclear,
}

/// Spectral or nuclear norm of an embedding.
#[derive(Clone, Debug)]
pub struct EmbeddedNorm {
    emb: Embedding,
    kind: NormKind,
}

impl EmbeddedNorm {
    pub fn new(emb: Embedding, kind: NormKind) -> Self {
        Self { emb, kind }
    }

    pub fn spectral(emb: Embedding) -> Self {
        Self::new(emb, NormKind::Spectral)
    }
}

impl NormOracle for EmbeddedNorm {
    fn dim(&self) -> usize {
        self.emb.dim()
    }

    fn norm(&self, x: &[C64]) -> Result<f64> {
        let m = self.emb.assemble(x);
        match self.kind {
            NormKind::Spectral => spectral_norm(&m),
            NormKind::Nuclear => nuclear_norm(&m),
        }
    }

    fn norm_grad(&self, x: &[C64], grad: &mut [C64]) -> Result<f64> {
        let m = self.emb.assemble(x);
        let (value, g) = match self.kind {
            NormKind::Spectral => {
                let (s, u, v) = top_singular_triplet(&m)?;
                (s, CMatrix::from_fn(m.rows(), m.cols(), |r, c| u[r] * v[c].conj()))
            }
            NormKind::Nuclear => {
                let d = svd(&m)?;
                let tol = 1e-13 * d.sigma[0];
                let live: Vec<usize> = (0..d.sigma.len()).filter(|&k| d.sigma[k] > tol).collect();
                let g = CMatrix::from_fn(m.rows(), m.cols(), |r, c| {
                    live.iter().map(|&k| d.u[(r, k)] * d.v[(c, k)].conj()).sum()
                });
                (d.sigma.iter().sum(), g)
            }
        };
        self.emb.pull_back(&g, grad);
        Ok(value)
    }

    fn dual(&self) -> Option<Box<dyn NormOracle>> {
        let kind = match self.kind {
            NormKind::Spectral => NormKind::Nuclear,
            NormKind::Nuclear => NormKind::Spectral,
        };
        Some(Box::new(Self::new(self.emb.clone(), kind)))
    }

    fn l2_bound(&self) -> f64 {
        match self.kind {
            NormKind::Spectral => 1.0,
            NormKind::Nuclear => (self.emb.rows.min(self.emb.cols) as f64).sqrt(),
        }
    }
}

/// `‖x‖ = (x* S x)^{1/2}` for Hermitian positive definite `S`.
#[derive(Clone, Debug)]
pub struct HilbertNorm {
    s: CMatrix,
    lambda_max: f64,
}

impl HilbertNorm {
    pub fn new(s: CMatrix) -> Result<Self> {
        // Rejects non-Hermitian and indefinite input.
        hermitian_power(&s, 1.0)?;
        let lambda_max = spectral_norm(&s)?;
        Ok(Self { s, lambda_max })
    }

    pub fn weighted(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(weights[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.s
    }
}

impl NormOracle for HilbertNorm {
    fn dim(&self) -> usize {
        self.s.rows()
    }

    fn norm(&self, x: &[C64]) -> Result<f64> {
        let sx = self.s.matvec(x)?;
        let q: f64 = x.iter().zip(&sx).map(|(a, b)| (a.conj() * b).re).sum();
        Ok(q.max(0.0).sqrt())
    }

    fn norm_grad(&self, x: &[C64], grad: &mut [C64]) -> Result<f64> {
        let sx = self.s.matvec(x)?;
        let q: f64 = x.iter().zip(&sx).map(|(a, b)| (a.conj() * b).re).sum();
        let v = q.max(0.0).sqrt();
        for (g, s) in grad.iter_mut().zip(&sx) {
            *g = if v > 0.0 { *s / v } else { ZERO };
        }
        Ok(v)
    }

    fn dual(&self) -> Option<Box<dyn NormOracle>> {
        let inv = hermitian_power(&self.s, -1.0).ok()?;
        Self::new(inv.conj()).ok().map(|h| Box::new(h) as Box<dyn NormOracle>)
    }

    fn l2_bound(&self) -> f64 {
        self.lambda_max.sqrt()
    }
}

/// Pointwise maximum of norms; used for `R ∩ C` and `MIN(ℓ∞)` levels.
#[derive(Debug)]
pub struct MaxNorm(pub Vec<Box<dyn NormOracle>>);

impl NormOracle for MaxNorm {
    fn dim(&self) -> usize {
        self.0[0].dim()
    }

    fn norm(&self, x: &[C64]) -> Result<f64> {
        self.0.iter().try_fold(0.0_f64, |m, o| Ok(m.max(o.norm(x)?)))
    }

    fn norm_grad(&self, x: &[C64], grad: &mut [C64]) -> Result<f64> {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, o) in self.0.iter().enumerate() {
            let v = o.norm(x)?;
            if v > best.0 {
                best = (v, i);
            }
        }
        self.0[best.1].norm_grad(x, grad)
    }

    fn dual(&self) -> Option<Box<dyn NormOracle>> {
        None
    }

    fn l2_bound(&self) -> f64 {
        self.0.iter().map(|o| o.l2_bound()).fold(0.0, f64::max)
    }
}

/// Norm oracle for `M_n(space)` on flat coordinates, when the space has an
/// exact engine with gradients.
pub fn oracle_for(space: OsDescriptor, n: usize) -> Option<Box<dyn NormOracle>> {
    let d = space.dim();
    match space {
        OsDescriptor::Row(_) | OsDescriptor::Column(_) | OsDescriptor::RowOp(_) | OsDescriptor::ColumnOp(_) => {
            Embedding::for_descriptor(space, n).map(|e| Box::new(EmbeddedNorm::spectral(e)) as Box<dyn NormOracle>)
        }
        OsDescriptor::IntersectRc(_) => Some(Box::new(MaxNorm(vec![
            Box::new(EmbeddedNorm::spectral(Embedding::row(n, d))),
            Box::new(EmbeddedNorm::spectral(Embedding::column(n, d))),
        ]))),
        OsDescriptor::MinLinf(_) => Some(Box::new(MaxNorm(
            (0..d)
                .map(|k| Box::new(EmbeddedNorm::spectral(Embedding::coordinate(n, d, k))) as Box<dyn NormOracle>)
                .collect(),
        ))),
        OsDescriptor::InterpRc { theta, .. } if theta == 0.0 => oracle_for(OsDescriptor::Row(d), n),
        OsDescriptor::InterpRc { theta, .. } if theta == 1.0 => oracle_for(OsDescriptor::RowOp(d), n),
        _ => None,
    }
}

/// The couple `(M_n(R), M_n(R^op))` on flat coordinates of `M_n(Row(d))`.
pub fn row_couple(n: usize, d: usize) -> NormCouple {
    NormCouple::new(
        Box::new(EmbeddedNorm::spectral(Embedding::row(n, d))),
        Box::new(EmbeddedNorm::spectral(Embedding::row_op(n, d))),
    )
    .expect("row and row-op embeddings share dimension")
}

fn psd_sqrt_norm(m: &CMatrix) -> Result<f64> {
    Ok(spectral_norm(m)?.sqrt())
}

/// `‖Σ_k A_k A_k*‖^{1/2}`.
pub fn row_norm(coords: &[CMatrix]) -> Result<f64> {
    let first = coords.first().ok_or(Error::EmptyInput("coordinates"))?;
    let mut s = CMatrix::zeros(first.rows(), first.rows());
    for a in coords {
        s = s.add(&a.matmul(&a.adjoint())?)?;
    }
    psd_sqrt_norm(&s)
}

/// `‖Σ_k A_k* A_k‖^{1/2}`.
pub fn column_norm(coords: &[CMatrix]) -> Result<f64> {
    let first = coords.first().ok_or(Error::EmptyInput("coordinates"))?;
    let mut s = CMatrix::zeros(first.cols(), first.cols());
    for a in coords {
        s = s.add(&a.adjoint().matmul(a)?)?;
    }
    psd_sqrt_norm(&s)
}

/// `‖Σ_k A_k ⊗ conj(A_k)‖^{1/2}`.
pub fn oh_norm(coords: &[CMatrix]) -> Result<f64> {
    let first = coords.first().ok_or(Error::EmptyInput("coordinates"))?;
    let n = first.rows();
    let mut s = CMatrix::zeros(n * n, n * n);
    for a in coords {
        s = s.add(&kron(a, &a.conj())?)?;
    }
    psd_sqrt_norm(&s)
}

/// `max_k ‖A_k‖`.
pub fn min_linf_norm(coords: &[CMatrix]) -> Result<f64> {
    if coords.is_empty() {
        return Err(Error::EmptyInput("coordinates"));
    }
    coords.iter().try_fold(0.0_f64, |m, a| Ok(m.max(spectral_norm(a)?)))
}

const PHASE_RESTARTS: u64 = 16;
const PHASE_ASCENT_ITERS: usize = 200;
/// Above this many nonzero coordinates the phase torus is too large to cover.
const BRANCH_MAX_COORDS: usize = 4;
const BRANCH_NODES: usize = 4000;
const BRANCH_REL_TOL: f64 = 1e-6;

fn phase_sum(coords: &[&CMatrix], phases: &[f64]) -> Result<CMatrix> {
    let mut s = CMatrix::zeros(coords[0].rows(), coords[0].cols());
    for (a, &p) in coords.iter().zip(phases) {
        s.axpy(C64::from_polar(1.0, p), a)?;
    }
    Ok(s)
}

/// Alternating ascent on `Re u* (Σ ω_m A_m) v`; monotone in `‖Σ ω_m A_m‖`.
fn phase_ascent(coords: &[&CMatrix], phases: &mut [f64]) -> Result<f64> {
    let mut best = spectral_norm(&phase_sum(coords, phases)?)?;
    for _ in 0..PHASE_ASCENT_ITERS {
        let (_, u, v) = top_singular_triplet(&phase_sum(coords, phases)?)?;
        for (a, p) in coords.iter().zip(phases.iter_mut()) {
            let av = a.matvec(&v)?;
            let c: C64 = u.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
            if c.norm() > 0.0 {
                *p = -c.arg();
            }
        }
        let now = spectral_norm(&phase_sum(coords, phases)?)?;
        if now <= best * (1.0 + 1e-14) {
            best = best.max(now);
            break;
        }
        best = now;
    }
    Ok(best)
}

/// Phases `ω` with `‖Σ ω_j a_j‖` as large as the restarted ascent finds, and
/// that value. Zero coordinates get phase one.
pub fn min_l1_norming_phases(coords: &[CMatrix]) -> Result<(f64, Vec<C64>)> {
    let live: Vec<usize> = (0..coords.len()).filter(|&j| !coords[j].is_zero()).collect();
    let mut omega = vec![C64::new(1.0, 0.0); coords.len()];
    if live.is_empty() {
        return Ok((0.0, omega));
    }
    let refs: Vec<&CMatrix> = live.iter().map(|&j| &coords[j]).collect();
    let mut best = (f64::NEG_INFINITY, vec![0.0; live.len()]);
    for restart in 0..PHASE_RESTARTS {
        let mut phases: Vec<f64> = if restart == 0 {
            vec![0.0; live.len()]
        } else {
            let mut r = rng::substream(0x6d69_6e6c_3162, restart);
            (0..live.len()).map(|_| 2.0 * PI * rng::uniform(&mut r)).collect()
        };
        let v = phase_ascent(&refs, &mut phases)?;
        if v > best.0 {
            best = (v, phases);
        }
    }
    for (&j, p) in live.iter().zip(&best.1) {
        omega[j] = C64::from_polar(1.0, *p);
    }
    Ok((best.0, omega))
}

#[derive(Debug)]
struct PhaseBox {
    bound: f64,
    center: Vec<f64>,
    half: Vec<f64>,
}

impl PartialEq for PhaseBox {
    fn eq(&self, other: &Self) -> bool {
        self.bound.total_cmp(&other.bound) == Ordering::Equal
    }
}
impl Eq for PhaseBox {}
impl PartialOrd for PhaseBox {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PhaseBox {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound)
    }
}

/// Branch and bound over phases `ω_2..ω_M` (`ω_1 = 1` by rotation
/// invariance). On a box with center `φ` and half-widths `h`, write
/// `e^{i(φ_m+δ_m)} = e^{iφ_m}(1 + iδ_m) + r_m` with `|r_m| <= δ_m²/2`. The
/// linear part is convex in `δ`, so its norm peaks at a vertex, giving
/// `max_± ‖S + Σ ±h_m B_m‖ + Σ h_m²/2 ‖A_m‖` with `B_m = i e^{iφ_m} A_m`.
/// The first-order bound `‖S‖ + Σ 2 sin(h_m/2) ‖A_m‖` is used when smaller.
fn phase_branch_and_bound(coords: &[&CMatrix], norms: &[f64], lower: &mut f64, nodes: usize) -> Result<f64> {
    let dims = coords.len() - 1;
    // Returns (value at center, upper bound over the box).
    let bound = |center: &[f64], half: &[f64]| -> Result<(f64, f64)> {
        let mut phases = vec![0.0];
        phases.extend_from_slice(center);
        let s = phase_sum(coords, &phases)?;
        let value = spectral_norm(&s)?;
        let first = value + half.iter().zip(&norms[1..]).map(|(h, a)| 2.0 * (0.5 * h.min(PI)).sin() * a).sum::<f64>();
        let curvature: f64 = half.iter().zip(&norms[1..]).map(|(h, a)| 0.5 * h * h * a).sum();
        if curvature >= first - value {
            return Ok((value, first));
        }
        let mut vertex = 0.0_f64;
        for corner in 0..1usize << dims {
            let mut m = s.clone();
            for k in 0..dims {
                let sign = if corner >> k & 1 == 1 { 1.0 } else { -1.0 };
                let w = C64::new(0.0, sign * half[k]) * C64::from_polar(1.0, center[k]);
                m.axpy(w, coords[k + 1])?;
            }
            vertex = vertex.max(spectral_norm(&m)?);
        }
        Ok((value, first.min(vertex + curvature)))
    };
    let mut heap = BinaryHeap::new();
    let center = vec![PI; dims];
    let half = vec![PI; dims];
    let (v, ub) = bound(&center, &half)?;
    *lower = lower.max(v);
    heap.push(PhaseBox { bound: ub, center, half });
    let mut evaluated = 1;
    while let Some(top) = heap.pop() {
        if top.bound <= *lower * (1.0 + BRANCH_REL_TOL) || evaluated >= nodes {
            return Ok(top.bound);
        }
        let axis = (0..dims).max_by(|&a, &b| (top.half[a] * norms[a + 1]).total_cmp(&(top.half[b] * norms[b + 1]))).unwrap_or(0);
        for sign in [-1.0, 1.0] {
            let mut center = top.center.clone();
            let mut half = top.half.clone();
            half[axis] *= 0.5;
            center[axis] += sign * half[axis];
            let (v, ub) = bound(&center, &half)?;
            evaluated += 1;
            *lower = lower.max(v);
            heap.push(PhaseBox { bound: ub, center, half });
        }
    }
    Ok(*lower)
}

/// Certified bracket for the `M_n(MIN(ℓ1^M))` norm
/// `sup_{ω ∈ T^M} ‖Σ_m ω_m A_m‖`, using the default search budget.
pub fn min_l1_bracket(coords: &[CMatrix]) -> Result<NormCertificate> {
    min_l1_bracket_with(coords, BRANCH_NODES)
}

/// As [`min_l1_bracket`] with an explicit branch-and-bound node budget
/// (`0` disables it, leaving the triangle-inequality upper bound).
pub fn min_l1_bracket_with(coords: &[CMatrix], nodes: usize) -> Result<NormCertificate> {
    if coords.is_empty() {
        return Err(Error::EmptyInput("coordinates"));
    }
    let live: Vec<&CMatrix> = coords.iter().filter(|a| !a.is_zero()).collect();
    match live.len() {
        0 => return Ok(NormCertificate::exact(0.0)),
        1 => return Ok(NormCertificate::exact(spectral_norm(live[0])?)),
        _ => {}
    }
    let norms = live.iter().map(|a| spectral_norm(a)).collect::<Result<Vec<_>>>()?;
    let triangle: f64 = norms.iter().sum();
    let mut lower = 0.0_f64;
    for restart in 0..PHASE_RESTARTS {
        let mut phases: Vec<f64> = if restart == 0 {
            vec![0.0; live.len()]
        } else {
            let mut r = rng::substream(0x6d69_6e6c_3162, restart);
            (0..live.len()).map(|_| 2.0 * PI * rng::uniform(&mut r)).collect()
        };
        lower = lower.max(phase_ascent(&live, &mut phases)?);
        if lower >= triangle * (1.0 - 1e-15) {
            return Ok(NormCertificate::exact(triangle));
        }
    }
    let mut upper = triangle;
    if nodes > 0 && live.len() <= BRANCH_MAX_COORDS {
        upper = upper.min(phase_branch_and_bound(&live, &norms, &mut lower, nodes)?);
    }
    Ok(NormCertificate::bracket(lower, upper + crate::CERT_SLACK))
}

/// Norm of `x` in `M_n(X)` with the default interpolation budget.
pub fn norm(x: &OsElement) -> Result<NormCertificate> {
    norm_with_budget(x, &Budget::default())
}

pub fn norm_with_budget(x: &OsElement, budget: &Budget) -> Result<NormCertificate> {
    let c = x.coords();
    let exact = |v: Result<f64>| v.map(NormCertificate::exact);
    match x.space() {
        OsDescriptor::Row(_) | OsDescriptor::ColumnOp(_) => exact(row_norm(c)),
        OsDescriptor::Column(_) | OsDescriptor::RowOp(_) => exact(column_norm(c)),
        OsDescriptor::Oh(_) => exact(oh_norm(c)),
        OsDescriptor::IntersectRc(_) => exact(Ok(row_norm(c)?.max(column_norm(c)?))),
        OsDescriptor::MinLinf(_) => exact(min_linf_norm(c)),
        OsDescriptor::MinL1(_) => min_l1_bracket(c),
        OsDescriptor::InterpRc { theta, d } => {
            if theta == 0.0 {
                exact(row_norm(c))
            } else if theta == 1.0 {
                exact(column_norm(c))
            } else {
                let couple = row_couple(x.n(), d);
                Ok(interpolation::bracket(&x.flat(), &couple, theta, budget)?.certificate())
            }
        }
    }
}

/// Norm of a functional on `M_n(base)` under the pairing
/// `⟨ξ, x⟩ = Σ_k Σ_ij (Ξ_k)_ij (A_k)_ij`: the nuclear norm of the same block
/// embedding.
pub fn dual_norm(functional: &OsElement, base: OsDescriptor) -> Result<NormCertificate> {
    base.validate()?;
    if base.dim() != functional.space().dim() {
        return Err(Error::Shape(format!(
            "functional has {} coordinates, base {} has {}",
            functional.space().dim(),
            base.name(),
            base.dim()
        )));
    }
    let emb = Embedding::for_descriptor(base, functional.n())
        .ok_or_else(|| Error::UnsupportedDescriptor(format!("dual norm on {}", base.name())))?;
    Ok(NormCertificate::exact(nuclear_norm(&emb.assemble(&functional.flat()))?))
}

pub fn distance(x: &OsElement, y: &OsElement) -> Result<NormCertificate> {
    norm(&x.sub(y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ONE;

    fn lemma32_b(space: OsDescriptor, n: usize) -> OsElement {
        let coords = (0..n).map(|k| CMatrix::unit(n, n, k, 0)).collect();
        OsElement::new(space, n, coords).unwrap()
    }

    #[test]
    fn lemma32_element_row_and_opposite() {
        let b = lemma32_b(OsDescriptor::Row(3), 3);
        assert!((norm(&b).unwrap().upper - 1.0).abs() < 1e-12);
        let bop = b.reinterpret(OsDescriptor::RowOp(3)).unwrap();
        assert!((norm(&bop).unwrap().upper - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lemma32_functional_dual_norms() {
        let f = lemma32_b(OsDescriptor::Row(4), 4);
        assert!((dual_norm(&f, OsDescriptor::Row(4)).unwrap().upper - 4.0).abs() < 1e-12);
        assert!((dual_norm(&f, OsDescriptor::RowOp(4)).unwrap().upper - 2.0).abs() < 1e-12);
        let z = OsElement::zeros(OsDescriptor::Row(4), 4);
        assert_eq!(dual_norm(&z, OsDescriptor::Row(4)).unwrap().upper, 0.0);
        assert!(matches!(dual_norm(&f, OsDescriptor::Oh(4)), Err(Error::UnsupportedDescriptor(_))));
    }

    #[test]
    fn oh_identity_coordinate() {
        let x = OsElement::new(OsDescriptor::Oh(1), 3, vec![CMatrix::identity(3)]).unwrap();
        assert!((norm(&x).unwrap().upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedded_gradient_is_norming() {
        let mut r = rng::seeded(8);
        for emb in [Embedding::row(2, 3), Embedding::column_op(2, 3)] {
            for kind in [NormKind::Spectral, NormKind::Nuclear] {
                let o = EmbeddedNorm::new(emb.clone(), kind);
                let x = rng::gaussian_vector(&mut r, 12, true);
                let mut g = vec![ZERO; 12];
                let v = o.norm_grad(&x, &mut g).unwrap();
                let pair: C64 = g.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
                assert!((pair.re - v).abs() < 1e-10 * v);
                let dual = o.dual().unwrap();
                let gc: Vec<C64> = g.iter().map(|z| z.conj()).collect();
                assert!((dual.norm(&gc).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hilbert_dual_pairs_to_one() {
        let mut r = rng::seeded(9);
        let g = rng::gaussian_matrix(&mut r, 3, 3, true);
        let s = g.matmul(&g.adjoint()).unwrap().add(&CMatrix::identity(3)).unwrap();
        let h = HilbertNorm::new(s).unwrap();
        let x = rng::gaussian_vector(&mut r, 3, true);
        let mut grad = vec![ZERO; 3];
        h.norm_grad(&x, &mut grad).unwrap();
        let xi: Vec<C64> = grad.iter().map(|z| z.conj()).collect();
        assert!((h.dual().unwrap().norm(&xi).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn min_l1_single_coordinate_is_exact() {
        let mut r = rng::seeded(10);
        let a = rng::gaussian_matrix(&mut r, 3, 3, true);
        let c = min_l1_bracket(&[CMatrix::zeros(3, 3), a.clone()]).unwrap();
        assert!(c.exact);
        assert!((c.upper - spectral_norm(&a).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn min_l1_first_level_is_l1() {
        // At n = 1 the MIN(ℓ1) norm is the ℓ1 norm.
        let coords: Vec<CMatrix> = [1.0, -2.0, 0.5].iter().map(|&v| CMatrix::from_real_rows(&[&[v]]).unwrap()).collect();
        let c = min_l1_bracket(&coords).unwrap();
        assert!(c.lower > 3.5 - 1e-12 && c.upper < 3.5 + 1e-8);
    }

    #[test]
    fn min_l1_branch_and_bound_tightens_triangle_bound() {
        // diag units: sup_ω ‖ω_1 e11 + ω_2 e22‖ = 1, triangle bound 2.
        let c = min_l1_bracket(&[CMatrix::unit(2, 2, 0, 0), CMatrix::unit(2, 2, 1, 1)]).unwrap();
        assert!((c.lower - 1.0).abs() < 1e-12);
        assert!(c.upper < 1.0 + 1e-5, "{c:?}");
    }

    #[test]
    fn interp_endpoints_are_exact() {
        let mut r = rng::seeded(12);
        let flat = rng::gaussian_vector(&mut r, 2 * 4, true);
        let x0 = OsElement::from_flat(OsDescriptor::InterpRc { d: 2, theta: 0.0 }, 2, &flat).unwrap();
        let row = OsElement::from_flat(OsDescriptor::Row(2), 2, &flat).unwrap();
        assert_eq!(norm(&x0).unwrap(), norm(&row).unwrap());
        let x1 = x0.reinterpret(OsDescriptor::InterpRc { d: 2, theta: 1.0 }).unwrap();
        let col = row.reinterpret(OsDescriptor::Column(2)).unwrap();
        assert_eq!(norm(&x1).unwrap(), norm(&col).unwrap());
    }

    #[test]
    fn first_level_hilbertian_spaces_agree_with_l2() {
        let v = [C64::new(1.0, 2.0), C64::new(-0.5, 0.0), ONE];
        let l2 = crate::numerics::l2_norm(&v);
        for space in [OsDescriptor::Row(3), OsDescriptor::Column(3), OsDescriptor::Oh(3), OsDescriptor::IntersectRc(3)] {
            let x = OsElement::from_flat(space, 1, &v).unwrap();
            assert!((norm(&x).unwrap().upper - l2).abs() < 1e-12, "{}", space.name());
        }
        let x = OsElement::from_flat(OsDescriptor::MinLinf(3), 1, &v).unwrap();
        assert!((norm(&x).unwrap().upper - 5f64.sqrt()).abs() < 1e-12);
    }
}
