//! Limited-memory BFGS with Armijo backtracking, optionally restricted to an
//! affine subspace by an orthogonal projector applied to every gradient.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::Result;

const MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) type Projector<'a> = &'a dyn Fn(&mut [f64]);

fn project(g: &mut [f64], projector: Option<Projector<'_>>) {
    if let Some(p) = projector {
        p(g);
    }
}

/// Projector onto the hyperplane `{v : a · v = 0}`.
pub(crate) fn hyperplane(a: &[f64]) -> impl Fn(&mut [f64]) + '_ {
    let aa = dot(a, a);
    move |g: &mut [f64]| {
        if aa > 0.0 {
            let c = dot(a, g) / aa;
            g.iter_mut().zip(a).for_each(|(gi, ai)| *gi -= c * ai);
        }
    }
}

/// Minimize `f` from `w`, returning the final value. `f` writes its gradient
/// into the second argument.
pub(crate) fn minimize<F>(w: &mut Vec<f64>, iters: usize, projector: Option<Projector<'_>>, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    let n = w.len();
    let mut g = alloc::vec![0.0; n];
    let mut fx = f(w, &mut g)?;
    project(&mut g, projector);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut trial = alloc::vec![0.0; n];
    let mut gt = alloc::vec![0.0; n];
    let mut stalls = 0;
    for _ in 0..iters {
        // Two-loop recursion.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        project(&mut d, projector);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        if slope == 0.0 {
            break;
        }
        let mut step = if history.is_empty() {
            let gn = dot(&g, &g).sqrt();
            (dot(w, w).sqrt().max(1.0) * 1e-2 / gn).min(1.0)
        } else {
            1.0
        };
        let mut accepted = false;
        for _ in 0..40 {
            trial.iter_mut().zip(w.iter().zip(&d)).for_each(|(t, (wi, di))| *t = wi + step * di);
            let ft = f(&trial, &mut gt)?;
            if ft.is_finite() && ft <= fx + ARMIJO * step * slope {
                project(&mut gt, projector);
                let s: Vec<f64> = trial.iter().zip(w.iter()).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-300 {
                    if history.len() == MEMORY {
                        history.pop_front();
                    }
                    history.push_back((s, y, 1.0 / sy));
                }
                let improvement = fx - ft;
                w.copy_from_slice(&trial);
                g.copy_from_slice(&gt);
                stalls = if improvement <= 1e-13 * fx.abs().max(1e-300) { stalls + 1 } else { 0 };
                fx = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        }
        if stalls >= 3 {
            break;
        }
    }
    Ok(fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rosenbrock() {
        let mut w = vec![-1.2, 1.0];
        let v = minimize(&mut w, 500, None, |x, g| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            Ok((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2))
        })
        .unwrap();
        assert!(v < 1e-12, "{v}");
        assert!((w[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn stays_on_hyperplane() {
        // min |w|² subject to w0 + w1 + w2 = 3, from a feasible start.
        let normal = [1.0, 1.0, 1.0];
        let proj = hyperplane(&normal);
        let mut w = vec![3.0, 0.0, 0.0];
        minimize(&mut w, 100, Some(&proj), |x, g| {
            g.iter_mut().zip(x).for_each(|(gi, xi)| *gi = 2.0 * xi);
            Ok(dot(x, x))
        })
        .unwrap();
        assert!((w.iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!(w.iter().all(|v| (v - 1.0).abs() < 1e-6), "{w:?}");
    }
}
