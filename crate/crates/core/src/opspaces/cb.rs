use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::norms::{norm, oracle_for};
use super::{OsDescriptor, OsElement};
use crate::error::{Error, Result};
use crate::numerics::{l2_norm, spectral_norm, CMatrix, C64, ZERO};
use crate::rng;

const ASCENT_STARTS: usize = 24;
const ASCENT_STEPS: usize = 120;
const SAMPLES_WITHOUT_GRADIENT: usize = 256;

/// Linear map `X → Y` given by a `dim(Y) x dim(X)` coordinate matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCoordMap {
    pub source: OsDescriptor,
    pub target: OsDescriptor,
    pub matrix: CMatrix,
}

impl LinearCoordMap {
    pub fn new(source: OsDescriptor, target: OsDescriptor, matrix: CMatrix) -> Result<Self> {
        source.validate()?;
        target.validate()?;
        if matrix.rows() != target.dim() || matrix.cols() != source.dim() {
            return Err(Error::Shape(format!(
                "map matrix {}x{} between {} and {}",
                matrix.rows(),
                matrix.cols(),
                source.name(),
                target.name()
            )));
        }
        Ok(Self { source, target, matrix })
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.matrix.matvec(v)
    }

    /// `f_n([x_ij]) = [f(x_ij)]`.
    pub fn amplify(&self, x: &OsElement) -> Result<OsElement> {
        x.amplify(self.target, |v| self.apply(v))
    }

    /// Same action on flat coordinates: `B_l = Σ_k T_lk A_k`.
    fn apply_flat(&self, x: &[C64], n2: usize) -> Vec<C64> {
        let (dt, ds) = (self.matrix.rows(), self.matrix.cols());
        let mut y = vec![ZERO; dt * n2];
        for l in 0..dt {
            for k in 0..ds {
                let t = self.matrix[(l, k)];
                if t != ZERO {
                    for c in 0..n2 {
                        y[l * n2 + c] += t * x[k * n2 + c];
                    }
                }
            }
        }
        y
    }

    fn adjoint_flat(&self, g: &[C64], n2: usize) -> Vec<C64> {
        let (dt, ds) = (self.matrix.rows(), self.matrix.cols());
        let mut x = vec![ZERO; ds * n2];
        for l in 0..dt {
            for k in 0..ds {
                let t = self.matrix[(l, k)].conj();
                if t != ZERO {
                    for c in 0..n2 {
                        x[k * n2 + c] += t * g[l * n2 + c];
                    }
                }
            }
        }
        x
    }
}

/// Lower estimates of `‖f_k‖` for `k = 1..K` and their running maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct CbEstimate {
    /// Running maximum over levels `1..=k`, so nondecreasing in `k`.
    pub levels: Vec<f64>,
    /// `levels[K-1]`: a lower bound for `‖f‖_cb`.
    pub value: f64,
    /// False when a norm engine only provides brackets; the estimate then
    /// uses lower bounds of numerators over upper bounds of denominators.
    pub exact_engines: bool,
}

fn hilbertian_at_first_level(space: OsDescriptor) -> bool {
    matches!(
        space,
        OsDescriptor::Row(_)
            | OsDescriptor::Column(_)
            | OsDescriptor::RowOp(_)
            | OsDescriptor::ColumnOp(_)
            | OsDescriptor::Oh(_)
            | OsDescriptor::IntersectRc(_)
            | OsDescriptor::InterpRc { .. }
    )
}

/// Ratio ascent `x ↦ ‖f_n x‖ / ‖x‖` from one start.
fn ascend(map: &LinearCoordMap, n: usize, x0: Vec<C64>) -> Result<f64> {
    let (src, dst) = match (oracle_for(map.source, n), oracle_for(map.target, n)) {
        (Some(s), Some(t)) => (s, t),
        _ => return Err(Error::UnsupportedDescriptor("no gradient engine".into())),
    };
    let n2 = n * n;
    let mut gs = vec![ZERO; x0.len()];
    let mut gt = vec![ZERO; map.target.dim() * n2];
    let ratio = |x: &[C64]| -> Result<f64> {
        let d = src.norm(x)?;
        Ok(if d > 0.0 { dst.norm(&map.apply_flat(x, n2))? / d } else { 0.0 })
    };
    let mut x = x0;
    let mut best = ratio(&x)?;
    let mut step = 0.5;
    for _ in 0..ASCENT_STEPS {
        let den = src.norm_grad(&x, &mut gs)?;
        let y = map.apply_flat(&x, n2);
        let num = dst.norm_grad(&y, &mut gt)?;
        if den <= 0.0 {
            break;
        }
        let back = map.adjoint_flat(&gt, n2);
        let grad: Vec<C64> = back.iter().zip(&gs).map(|(b, s)| (*b * den - *s * num) / (den * den)).collect();
        let gnorm = l2_norm(&grad);
        if gnorm < 1e-14 {
            break;
        }
        let scale = l2_norm(&x) / gnorm;
        let mut improved = false;
        while step > 1e-10 {
            let cand: Vec<C64> = x.iter().zip(&grad).map(|(a, g)| *a + *g * (step * scale)).collect();
            let r = ratio(&cand)?;
            if r > best {
                best = r;
                x = cand;
                step = (step * 2.0).min(1.0);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(best)
}

fn level_by_ascent(map: &LinearCoordMap, n: usize, seed: u64, warm: Option<&[C64]>) -> Result<f64> {
    let len = map.source.dim() * n * n;
    let mut r = rng::substream(seed, n as u64);
    let mut best = 0.0_f64;
    for s in 0..ASCENT_STARTS {
        let x0 = match (s, warm) {
            (0, Some(w)) => w.to_vec(),
            _ => rng::gaussian_vector(&mut r, len, true),
        };
        best = best.max(ascend(map, n, x0)?);
    }
    Ok(best)
}

fn level_by_sampling(map: &LinearCoordMap, n: usize, seed: u64) -> Result<f64> {
    let len = map.source.dim() * n * n;
    let mut r = rng::substream(seed, n as u64);
    let mut best = 0.0_f64;
    for _ in 0..SAMPLES_WITHOUT_GRADIENT {
        let x = OsElement::from_flat(map.source, n, &rng::gaussian_vector(&mut r, len, true))?;
        let den = norm(&x)?.upper;
        if den > 0.0 {
            best = best.max(norm(&map.amplify(&x)?)?.lower / den);
        }
    }
    Ok(best)
}

/// Lower bound for `‖f‖_cb` from the first `K` amplifications.
pub fn cb_norm_truncated(map: &LinearCoordMap, k: usize) -> Result<CbEstimate> {
    cb_norm_truncated_seeded(map, k, 0)
}

pub fn cb_norm_truncated_seeded(map: &LinearCoordMap, k: usize, seed: u64) -> Result<CbEstimate> {
    if k == 0 {
        return Err(Error::InvalidParameter("truncation K must be >= 1".into()));
    }
    let exact_engines = oracle_for(map.source, 1).is_some() && oracle_for(map.target, 1).is_some();
    let mut levels = Vec::with_capacity(k);
    let mut running = 0.0_f64;
    for n in 1..=k {
        let v = if n == 1 && hilbertian_at_first_level(map.source) && hilbertian_at_first_level(map.target) {
            spectral_norm(&map.matrix)?
        } else if exact_engines {
            level_by_ascent(map, n, seed, None)?
        } else {
            level_by_sampling(map, n, seed)?
        };
        running = running.max(v);
        levels.push(running);
    }
    Ok(CbEstimate {
        value: running,
        levels,
        exact_engines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transpose_like(d: usize) -> LinearCoordMap {
        LinearCoordMap::new(OsDescriptor::Row(d), OsDescriptor::Column(d), CMatrix::identity(d)).unwrap()
    }

    #[test]
    fn identity_and_scalar_multiples() {
        let id = LinearCoordMap::new(OsDescriptor::Row(3), OsDescriptor::Row(3), CMatrix::identity(3)).unwrap();
        let e = cb_norm_truncated(&id, 3).unwrap();
        assert!(e.levels.iter().all(|v| (v - 1.0).abs() < 1e-9), "{e:?}");
        let s = LinearCoordMap::new(OsDescriptor::Row(2), OsDescriptor::Row(2), CMatrix::identity(2).scale(C64::new(0.0, -2.5))).unwrap();
        assert!((cb_norm_truncated(&s, 2).unwrap().value - 2.5).abs() < 1e-9);
    }

    #[test]
    fn row_to_column_identity_grows_with_level() {
        // The formal identity R → C has ‖f_n‖ = √n on the first d levels.
        let e = cb_norm_truncated(&transpose_like(2), 2).unwrap();
        assert!((e.levels[0] - 1.0).abs() < 1e-12);
        assert!(e.levels[1] >= e.levels[0]);
        assert!(e.levels[1] > 1.4, "{e:?}");
        assert!(e.levels[1] <= 2f64.sqrt() + 1e-9);
    }

    #[test]
    fn diagonal_row_map_is_banach_norm_at_every_level() {
        let t = CMatrix::from_real_rows(&[&[0.5, 0.0, 0.0], &[0.0, -1.5, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        let f = LinearCoordMap::new(OsDescriptor::Row(3), OsDescriptor::Row(3), t).unwrap();
        let e = cb_norm_truncated(&f, 3).unwrap();
        assert!(e.levels.iter().all(|v| (v - 1.5).abs() < 1e-9), "{e:?}");
    }
}
