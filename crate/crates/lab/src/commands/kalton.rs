//! `kalton` and `sphere-glue`: every checked inequality with its margin.

use std::sync::Arc;

use opspace_core::kalton::{
    eps_norm_estimate, lemma59_nodes, section_into_z, z_norm, EquivalenceMaps, HomogeneousMap, QuotientMapData,
    SphericalAmplification, ZElement, ZVector,
};
use opspace_core::numerics::CMatrix;
use opspace_core::opspaces::norm;
use opspace_core::rng::{gaussian_vector, substream, uniform, LabRng};
use opspace_core::{OsDescriptor, OsElement};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{Finished, Run};
use crate::error::{LabError, LabResult};
use crate::report::{csv_report, json_report, num, Output, Status};

/// Relative distortion of the injected faulty section.
const FAULT: f64 = 1e-3;
const PAIR_CHUNK: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub k: usize,
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    /// `bound − value`; negative when the check fails.
    pub margin: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(k: usize, name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            k,
            name,
            value,
            bound,
            margin: bound - value,
            pass: value <= bound,
        }
    }
}

fn quotient(run: &mut Run) -> LabResult<Arc<QuotientMapData>> {
    let n = *run.opts.quotient_n.get_or_insert(3);
    if !(1..=6).contains(&n) {
        return Err(LabError::input(format!("quotient-n must be in 1..=6, got {n}")));
    }
    Ok(Arc::new(QuotientMapData::sign_vectors(n)?))
}

fn max_entry(x: &OsElement) -> f64 {
    x.coords().iter().map(CMatrix::max_abs).fold(0.0, f64::max)
}

fn ball_point(rng: &mut LabRng, space: OsDescriptor, k: usize, max_radius: f64) -> LabResult<OsElement> {
    let radius = max_radius * uniform(rng);
    let x = OsElement::from_flat(space, k, &gaussian_vector(rng, space.dim() * k * k, false))?;
    let n = norm(&x)?.upper;
    Ok(if n > 0.0 { x.scale_real(radius / n) } else { x })
}

/// One or two summands in `Y_1..Y_8`, scaled to norm at most `u·max_radius`.
fn z_point(rng: &mut LabRng, q: &QuotientMapData, k: usize, max_radius: f64) -> LabResult<ZElement> {
    let radius = max_radius * uniform(rng);
    let count = 1 + (uniform(rng) * 2.0) as usize;
    let mut parts = Vec::new();
    for _ in 0..count {
        let m = 1 + (uniform(rng) * 8.0) as u32;
        let d = q.source_dim();
        parts.push((m, OsElement::from_flat(q.source(), k, &gaussian_vector(rng, d * k * k, false))?));
    }
    let z = ZElement::from_parts(k, q.source_dim(), parts)?;
    let up = z_norm(q, &z)?.upper;
    Ok(if up > 0.0 { z.scale_real(radius / up) } else { z })
}

fn checks_csv(run: &Run, status: Status, checks: &[Check]) -> String {
    let rows = checks
        .iter()
        .map(|c| vec![c.k.to_string(), c.name.to_string(), num(c.value), num(c.bound), num(c.margin), c.pass.to_string()])
        .collect::<Vec<_>>();
    csv_report(&run.meta(), &[("status", format!("{status:?}"))], &["k", "check", "value", "bound", "margin", "pass"], &rows)
}

fn finish(run: &mut Run, file: &str, checks: Vec<Check>, partial: bool, extra: serde_json::Value) -> Finished {
    let passed = checks.iter().all(|c| c.pass);
    let status = Status::from_flags(passed, partial);
    let csv = run.opts.format_is_csv();
    let mut output = Output::default();
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| format!("k={} {}", c.k, c.name)).collect();
    if csv {
        output.add(format!("{file}.csv"), checks_csv(run, status, &checks));
    }
    let mut body = json!({ "checks": checks, "passed": passed });
    if let (Some(b), serde_json::Value::Object(e)) = (body.as_object_mut(), extra) {
        b.extend(e);
    }
    output.add(format!("{file}.json"), json_report(&run.meta(), status, body));
    let summary = if failed.is_empty() {
        format!("{} checks passed", checks.len())
    } else {
        format!("{} of {} checks failed: {}", failed.len(), checks.len(), failed.join(", "))
    };
    Finished { status, summary, output }
}

pub fn kalton(run: &mut Run) -> LabResult<Finished> {
    let q = quotient(run)?;
    let ks = run.opts.ns("1..3")?;
    if ks.iter().any(|&k| k > 4) {
        return Err(LabError::input("matrix level k must be at most 4"));
    }
    let samples = *run.opts.samples.get_or_insert(100);
    let fault = *run.opts.fault.get_or_insert(false);
    let dim = q.source_dim();
    let mut checks = Vec::new();
    let mut details = Vec::new();
    let mut partial = false;
    for &k in &ks {
        if run.expired() {
            partial = true;
            break;
        }
        let eps = (-(k as f64)).exp();
        let section = section_into_z(Arc::clone(&q), k, eps)?;
        let map: HomogeneousMap<ZVector> = if fault {
            let inner = section.map().clone();
            HomogeneousMap::from_homogeneous(q.target(), move |x| Ok(inner.eval(x)?.scaled(1.0 + FAULT)))
        } else {
            section.map().clone()
        };
        let mut rng = substream(run.seed, k as u64);
        let mut pairs = Vec::with_capacity(samples);
        for i in 0..samples {
            let x = ball_point(&mut rng, q.target(), k, 3.0)?;
            let y = if i % 2 == 0 {
                ball_point(&mut rng, q.target(), k, 3.0)?
            } else {
                x.add(&ball_point(&mut rng, q.target(), k, 0.05)?)?
            };
            pairs.push((x, y));
        }
        let residual = pairs
            .par_iter()
            .map(|(x, _)| -> LabResult<f64> { Ok(max_entry(&map.amplify(x, dim)?.q_tilde(&q)?.sub(x)?)) })
            .collect::<LabResult<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let estimates = pairs
            .par_chunks(PAIR_CHUNK)
            .map(|chunk| eps_norm_estimate(chunk, eps, |x| map.amplify(x, dim), |a, b| z_norm(&q, &a.sub(b)?)))
            .collect::<opspace_core::Result<Vec<_>>>()?;
        let eps_lower = estimates.iter().map(|e| e.lower).fold(0.0, f64::max);
        let eps_conservative = estimates.iter().map(|e| e.conservative).fold(0.0, f64::max);
        if run.expired() {
            partial = true;
        }

        let maps = EquivalenceMaps::new(Arc::clone(&q), k)?;
        let ball = (k as f64).exp();
        let mut zs = Vec::with_capacity(samples);
        for i in 0..samples {
            let y = z_point(&mut rng, &q, k, ball)?;
            let w = if i % 2 == 0 {
                z_point(&mut rng, &q, k, ball)?
            } else {
                let near = y.add(&z_point(&mut rng, &q, k, 0.5)?)?;
                let up = z_norm(&q, &near)?.upper;
                if up > ball {
                    near.scale_real(ball / up)
                } else {
                    near
                }
            };
            zs.push((y, w));
        }
        // (inverse, kernel, upper excess, lower excess) per pair.
        let per_pair = zs
            .par_iter()
            .map(|(y, w)| -> LabResult<[f64; 4]> {
                let (x, z) = maps.g(y)?;
                let dist = maps.z_distance(y, w)?;
                let disp = maps.g_displacement(y, w)?;
                Ok([
                    maps.h(&x, &z)?.max_abs_diff(y)?,
                    maps.kernel_residual(&z)?,
                    disp.upper - (2.0 * dist.lower + 1.0),
                    (0.5 * dist.upper - 1.5) - disp.lower,
                ])
            })
            .collect::<LabResult<Vec<_>>>()?;
        let worst = |i: usize| per_pair.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
        let violations = |i: usize| per_pair.iter().filter(|p| p[i] > 1e-9).count();
        checks.push(Check::at_most(k, "section residual |Q̃f(x) − x|", residual, 1e-9));
        checks.push(Check::at_most(k, "‖f_k‖^ε sampled lower bound", eps_lower, 1.0 + 1e-6));
        checks.push(Check::at_most(k, "|h(g(y)) − y|", worst(0), 1e-9));
        checks.push(Check::at_most(k, "kernel residual of g", worst(1), 1e-9));
        checks.push(Check::at_most(k, "‖g(y) − g(w)‖ − (2t + 1)", worst(2), 1e-9));
        checks.push(Check::at_most(k, "(t/2 − 3/2) − ‖g(y) − g(w)‖", worst(3), 1e-9));
        details.push(json!({
            "k": k,
            "eps": eps,
            "section_level": section.m,
            "eps_norm_conservative": eps_conservative,
            "upper_violations": violations(2),
            "lower_violations": violations(3),
            "pairs": samples,
        }));
    }
    let extra = json!({ "quotient_n": q.target_dim(), "fault_injected": fault, "levels": details });
    Ok(finish(run, "kalton", checks, partial, extra))
}

pub fn sphere_glue(run: &mut Run) -> LabResult<Finished> {
    let q = quotient(run)?;
    let ks = run.opts.ns("2")?;
    let [k] = ks[..] else {
        return Err(LabError::input("sphere-glue takes a single matrix level k"));
    };
    if k > 4 {
        return Err(LabError::input("matrix level k must be at most 4"));
    }
    let nodes = *run.opts.nodes.get_or_insert(8);
    let big_k = *run.opts.big_k.get_or_insert(1.0);
    let samples = *run.opts.samples.get_or_insert(200);
    let top = *run.opts.radius.get_or_insert(4.0_f64.exp());
    if !(top.is_finite() && top > 0.0) {
        return Err(LabError::input("radius must be positive"));
    }
    let glued = SphericalAmplification::glue(lemma59_nodes(Arc::clone(&q), k, nodes)?, k, big_k)?;
    let mut rng = substream(run.seed, 0x676c_7565);
    let mut pairs = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = ball_point(&mut rng, q.target(), k, top)?;
        let z = if i % 2 == 0 {
            ball_point(&mut rng, q.target(), k, top)?
        } else {
            let near = x.add(&ball_point(&mut rng, q.target(), k, 2.0)?)?;
            let n = norm(&near)?.upper;
            if n > top {
                near.scale_real(top / n)
            } else {
                near
            }
        };
        pairs.push((x, z));
    }
    // (residual, sphere restriction, conservative excess, certified excess, beyond grid) per pair.
    let per_pair = pairs
        .par_iter()
        .map(|(x, z)| -> LabResult<Option<[f64; 5]>> {
            if run.expired() {
                return Ok(None);
            }
            let fx = glued.eval(x)?;
            let fz = glued.eval(z)?;
            let residual = max_entry(&fx.value.q_tilde(&q)?.sub(x)?);
            let witness = ZElement::from_entries(k, q.source_dim(), |a, b| glued.witness_value(fx.radius, &x.entry(a, b)))?;
            let sphere = witness.max_abs_diff(&fx.value)?;
            let d = norm(&x.sub(z)?)?.upper;
            let diff = z_norm(&q, &fx.value.sub(&fz.value)?)?;
            let bound = 2.0 * big_k * d + big_k;
            Ok(Some([
                residual,
                sphere,
                diff.upper - bound,
                diff.lower - bound,
                f64::from(u8::from(fx.beyond_grid || fz.beyond_grid)),
            ]))
        })
        .collect::<LabResult<Vec<_>>>()?;
    let partial = per_pair.iter().any(Option::is_none);
    let per_pair: Vec<[f64; 5]> = per_pair.into_iter().flatten().collect();
    let worst = |i: usize| per_pair.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max).max(if i < 2 { 0.0 } else { f64::NEG_INFINITY });
    let count = |i: usize| per_pair.iter().filter(|p| p[i] > 1e-9).count();
    let checks = vec![
        Check::at_most(k, "section residual |Q̃F(x) − x|", worst(0), 1e-9),
        Check::at_most(k, "sphere restriction |F − f^r_k|", worst(1), 1e-12),
        Check::at_most(k, "‖F(x) − F(z)‖ − (2K‖x − z‖ + K)", worst(2), 1e-9),
    ];
    let extra = json!({
        "quotient_n": q.target_dim(),
        "big_k": big_k,
        "nodes": nodes,
        "pairs": per_pair.len(),
        "conservative_violations": count(2),
        "certified_violations": count(3),
        "pairs_past_last_node": per_pair.iter().filter(|p| p[4] > 0.0).count(),
    });
    Ok(finish(run, "sphere-glue", checks, partial, extra))
}
