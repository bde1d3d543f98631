//! Sampled one-sided estimates of the moduli
//! `ω_f(t) = sup{‖f(x) − f(y)‖ : ‖x − y‖ <= t}` and
//! `ρ_f(t) = inf{‖f(x) − f(y)‖ : ‖x − y‖ >= t}` on bounded sets.
//!
//! Every reported value is realized by a stored witness pair. Distances come
//! as certificates: a pair counts for `ω(t)` only if its distance is certainly
//! `<= t`, and its displacement enters through the lower bound; dually for `ρ`.

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numerics::C64;
use crate::obstruction::build_special;
use crate::opspaces::{distance, norm, NormCertificate, OsDescriptor, OsElement};
use crate::rng;

pub const DEFAULT_GRID: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
pub const DEFAULT_PAIRS_PER_CELL: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    UniformBall,
    Sphere,
    /// The special column matrices `a_j, b_j, c, d`.
    Structured,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainSampler {
    pub descriptor: OsDescriptor,
    pub n: usize,
    pub radius: f64,
    pub count: usize,
    pub seed: u64,
    pub strategy: Strategy,
    /// Draw complex coordinates (real otherwise).
    pub complex: bool,
}

impl DomainSampler {
    pub fn new(descriptor: OsDescriptor, n: usize, radius: f64, count: usize, seed: u64, strategy: Strategy) -> Self {
        Self {
            descriptor,
            n,
            radius,
            count,
            seed,
            strategy,
            complex: false,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Err(Error::InvalidParameter(format!("radius {}", self.radius)));
        }
        self.descriptor.validate()
    }

    fn direction(&self, r: &mut rng::LabRng) -> Result<OsElement> {
        let d = self.descriptor.dim();
        let flat = rng::gaussian_vector(r, d * self.n * self.n, self.complex);
        OsElement::from_flat(self.descriptor, self.n, &flat)
    }

    /// `x` scaled so that its certified norm is `<= s` (or `= s` when exact).
    fn rescale(x: &OsElement, s: f64) -> Result<OsElement> {
        let c = norm(x)?;
        Ok(if c.upper > 0.0 { x.scale_real(s / c.upper) } else { x.clone() })
    }

    fn draw(&self, r: &mut rng::LabRng) -> Result<OsElement> {
        let x = self.direction(r)?;
        match self.strategy {
            Strategy::Sphere => {
                let c = norm(&x)?;
                if !c.exact {
                    return Err(Error::UnsupportedDescriptor(format!(
                        "{}: sphere sampling needs exact norms",
                        self.descriptor.name()
                    )));
                }
                Self::rescale(&x, self.radius)
            }
            _ => {
                let dim = (self.descriptor.dim() * self.n * self.n) as f64;
                Self::rescale(&x, self.radius * rng::uniform(r).powf(1.0 / dim))
            }
        }
    }

    /// The sample points. Structured samplers emit `a_j, b_j, c, d` (scaled
    /// into the ball) and ignore `count`.
    pub fn samples(&self) -> Result<Vec<OsElement>> {
        self.check()?;
        if self.strategy == Strategy::Structured {
            let sp = build_special(self.n, 1.0, self.descriptor)?;
            let mut pts: Vec<OsElement> = sp.a.into_iter().chain(sp.b).collect();
            pts.push(sp.c);
            pts.push(sp.d);
            let top = pts.iter().map(|p| norm(p).map(|c| c.upper)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
            let s = if top > 0.0 { self.radius / top } else { 0.0 };
            return Ok(pts.into_iter().map(|p| p.scale_real(s)).collect());
        }
        let mut r = rng::substream(self.seed, 0x7361_6d70);
        (0..self.count).map(|_| self.draw(&mut r)).collect()
    }

    /// Pairs for a distance grid: every pair of structured points, or for
    /// random strategies `per_cell` pairs per grid value `t`, built as a point
    /// and a companion at distance about `t` pulled back into the ball.
    pub fn pairs(&self, grid: &[f64], per_cell: usize) -> Result<Vec<(OsElement, OsElement)>> {
        self.check()?;
        if self.strategy == Strategy::Structured {
            let pts = self.samples()?;
            let mut out = Vec::new();
            for i in 0..pts.len() {
                for j in i..pts.len() {
                    out.push((pts[i].clone(), pts[j].clone()));
                }
            }
            return Ok(out);
        }
        let mut r = rng::substream(self.seed, 0x7061_6972);
        let mut out = Vec::with_capacity(grid.len() * per_cell);
        for &t in grid {
            for _ in 0..per_cell {
                let x = self.draw(&mut r)?;
                let step = Self::rescale(&self.direction(&mut r)?, t * (0.5 + rng::uniform(&mut r)))?;
                let mut y = x.add(&step)?;
                let ny = norm(&y)?;
                let limit = if self.strategy == Strategy::Sphere { ny.upper > 0.0 } else { ny.upper > self.radius };
                if limit {
                    y = y.scale_real(self.radius / ny.upper);
                }
                out.push((x, y));
            }
        }
        Ok(out)
    }
}

/// One evaluated pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairRecord {
    pub x: OsElement,
    pub y: OsElement,
    pub distance: NormCertificate,
    pub displacement: NormCertificate,
}

/// Evaluates one pair; safe to call concurrently for pure maps.
pub fn evaluate_pair<T>(
    x: &OsElement,
    y: &OsElement,
    map: impl Fn(&OsElement) -> Result<T>,
    target_distance: impl Fn(&T, &T) -> Result<NormCertificate>,
) -> Result<PairRecord> {
    let fx = map(x).map_err(|e| Error::MapEvaluation(format!("{e} at input {:?}", x.flat())))?;
    let fy = map(y).map_err(|e| Error::MapEvaluation(format!("{e} at input {:?}", y.flat())))?;
    Ok(PairRecord {
        x: x.clone(),
        y: y.clone(),
        distance: distance(x, y)?,
        displacement: target_distance(&fx, &fy)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuliReport {
    pub grid: Vec<f64>,
    pub omega_lower: Vec<f64>,
    pub omega_witness: Vec<Option<usize>>,
    /// `None` when no pair is certainly at distance `>= t`.
    pub rho_upper: Vec<Option<f64>>,
    pub rho_witness: Vec<Option<usize>>,
    /// Pairs certainly within distance `t`, per grid value.
    pub omega_counts: Vec<usize>,
    /// Pairs certainly at distance at least `t`, per grid value.
    pub rho_counts: Vec<usize>,
    pub witnesses: Vec<PairRecord>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("empty grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Grid("grid must be increasing, finite and nonnegative".into()));
    }
    Ok(())
}

/// The single reducer over evaluated pairs.
pub fn moduli_from_records(records: Vec<PairRecord>, grid: &[f64]) -> Result<ModuliReport> {
    check_grid(grid)?;
    let g = grid.len();
    let mut rep = ModuliReport {
        grid: grid.to_vec(),
        omega_lower: vec_of(g, 0.0),
        omega_witness: vec_of(g, None),
        rho_upper: vec_of(g, None),
        rho_witness: vec_of(g, None),
        omega_counts: vec_of(g, 0),
        rho_counts: vec_of(g, 0),
        witnesses: Vec::new(),
    };
    let mut omega_best: Vec<Option<usize>> = vec_of(g, None);
    let mut rho_best: Vec<Option<usize>> = vec_of(g, None);
    for (idx, rec) in records.iter().enumerate() {
        for (k, &t) in grid.iter().enumerate() {
            if rec.distance.upper <= t {
                rep.omega_counts[k] += 1;
                if omega_best[k].map_or(true, |b| rec.displacement.lower > records[b].displacement.lower) {
                    omega_best[k] = Some(idx);
                }
            }
            if rec.distance.lower >= t {
                rep.rho_counts[k] += 1;
                if rho_best[k].map_or(true, |b| rec.displacement.upper < records[b].displacement.upper) {
                    rho_best[k] = Some(idx);
                }
            }
        }
    }
    let mut kept: Vec<(usize, usize)> = Vec::new();
    let mut keep = |idx: usize, witnesses: &mut Vec<PairRecord>| -> usize {
        if let Some(&(_, w)) = kept.iter().find(|(i, _)| *i == idx) {
            return w;
        }
        witnesses.push(records[idx].clone());
        kept.push((idx, witnesses.len() - 1));
        witnesses.len() - 1
    };
    for k in 0..g {
        if let Some(b) = omega_best[k] {
            rep.omega_lower[k] = records[b].displacement.lower;
            rep.omega_witness[k] = Some(keep(b, &mut rep.witnesses));
        }
        if let Some(b) = rho_best[k] {
            rep.rho_upper[k] = Some(records[b].displacement.upper);
            rep.rho_witness[k] = Some(keep(b, &mut rep.witnesses));
        }
    }
    Ok(rep)
}

fn vec_of<T: Clone>(len: usize, v: T) -> Vec<T> {
    alloc::vec![v; len]
}

/// Sequential estimation over `sampler.pairs(grid, per_cell)`.
pub fn estimate_moduli<T>(
    map: impl Fn(&OsElement) -> Result<T>,
    target_distance: impl Fn(&T, &T) -> Result<NormCertificate>,
    sampler: &DomainSampler,
    grid: &[f64],
    per_cell: usize,
) -> Result<ModuliReport> {
    check_grid(grid)?;
    let records = sampler
        .pairs(grid, per_cell)?
        .iter()
        .map(|(x, y)| evaluate_pair(x, y, &map, &target_distance))
        .collect::<Result<Vec<_>>>()?;
    moduli_from_records(records, grid)
}

/// Distance in `M_n(target)` for maps returning [`OsElement`]s.
pub fn element_distance(a: &OsElement, b: &OsElement) -> Result<NormCertificate> {
    distance(a, b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineCheck {
    /// `ω(1)` lower estimate.
    pub l: f64,
    /// Grid values with `ω(t) > L t + L`.
    pub violations: Vec<f64>,
}

pub fn affine_bound_check(report: &ModuliReport) -> Result<AffineCheck> {
    let k = report
        .grid
        .iter()
        .position(|&t| t == 1.0)
        .ok_or_else(|| Error::Grid("affine check needs t = 1 on the grid".into()))?;
    let l = report.omega_lower[k];
    Ok(AffineCheck {
        l,
        violations: report
            .grid
            .iter()
            .zip(&report.omega_lower)
            .filter(|(t, w)| **w > l * **t + l)
            .map(|(t, _)| *t)
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquiModuliReport {
    pub per_n: Vec<ModuliReport>,
    pub grid: Vec<f64>,
    pub omega_lower: Vec<f64>,
    pub rho_upper: Vec<Option<f64>>,
}

pub fn aggregate_equi(reports: Vec<ModuliReport>) -> Result<EquiModuliReport> {
    let first = reports.first().ok_or(Error::EmptyInput("moduli reports"))?;
    let grid = first.grid.clone();
    if reports.iter().any(|r| r.grid != grid) {
        return Err(Error::Grid("reports use different grids".into()));
    }
    let g = grid.len();
    let omega_lower = (0..g).map(|k| reports.iter().map(|r| r.omega_lower[k]).fold(0.0, f64::max)).collect();
    let rho_upper = (0..g)
        .map(|k| reports.iter().filter_map(|r| r.rho_upper[k]).reduce(f64::min))
        .collect();
    Ok(EquiModuliReport {
        per_n: reports,
        grid,
        omega_lower,
        rho_upper,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionVerdict {
    /// Aggregated `ρ(r) > 0`. Only evidence: the margin is an upper bound.
    pub expanding: bool,
    pub margin: Option<f64>,
    /// `(report index, witness index)` realizing the margin.
    pub witness: Option<(usize, usize)>,
}

pub fn expansion_witness(equi: &EquiModuliReport, r: f64) -> Result<ExpansionVerdict> {
    let k = equi
        .grid
        .iter()
        .position(|&t| t == r)
        .ok_or_else(|| Error::Grid(format!("r = {r} is not on the grid")))?;
    let margin = equi.rho_upper[k];
    let witness = margin.and_then(|m| {
        equi.per_n
            .iter()
            .enumerate()
            .find(|(_, rep)| rep.rho_upper[k] == Some(m))
            .and_then(|(i, rep)| rep.rho_witness[k].map(|w| (i, w)))
    });
    Ok(ExpansionVerdict {
        expanding: margin.is_some_and(|m| m > 0.0),
        margin,
        witness,
    })
}

/// The Row → Column coordinate identity scaled by `1/√n` at level `n`: a
/// family whose expansion collapses as `n` grows.
pub fn collapse_family(n: usize) -> impl Fn(&OsElement) -> Result<OsElement> {
    let s = 1.0 / (n as f64).sqrt();
    move |x: &OsElement| {
        let target = OsDescriptor::Column(x.space().dim());
        x.amplify(target, |v: &[C64]| -> Result<Vec<C64>> { Ok(v.iter().map(|z| z * s).collect()) })
    }
}
