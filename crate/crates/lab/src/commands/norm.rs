//! `norm` and `interp`.

use opspace_core::interpolation::{bracket, hilbert_couple_exact, NormCouple};
use opspace_core::numerics::CMatrix;
use opspace_core::obstruction::{build_special, lemma32_element};
use opspace_core::opspaces::{norm_with_budget, row_couple};
use opspace_core::rng::{gaussian_matrix, gaussian_vector, substream};
use opspace_core::OsElement;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{Finished, Run};
use crate::error::{LabError, LabResult};
use crate::formats::{parse_element, BoundsJson, ElementJson, InterpJson};
use crate::report::{csv_report, json_report, num, Output, Status};

/// Elements named by `--element` or `--builtin`, one per `n` for builtins.
fn elements(run: &mut Run, space_default: &str, n_default: &str) -> LabResult<Vec<OsElement>> {
    if let Some(path) = run.opts.element.clone() {
        if run.opts.builtin.is_some() {
            return Err(LabError::input("give either --element or --builtin, not both"));
        }
        let text = std::fs::read_to_string(&path)
            .map_err(|e| LabError::input(format!("cannot read element {}: {e}", path.display())))?;
        return Ok(vec![parse_element(&text, &path.display().to_string())?]);
    }
    let ns = run.opts.ns(n_default)?;
    let builtin = run.opts.builtin.get_or_insert_with(|| "lemma32-b".into()).clone();
    let top = *ns.last().expect("nonempty range");
    let need = match builtin.as_str() {
        "lemma32-b" => top,
        "special-c" | "special-d" => 2 * top,
        _ => 1,
    };
    let d = *run.opts.truncation.get_or_insert(need.max(3));
    let space = run.opts.descriptor(space_default, d)?;
    ns.iter()
        .map(|&n| -> LabResult<OsElement> {
            Ok(match builtin.as_str() {
                "lemma32-b" => lemma32_element(n, space)?,
                "zero" => OsElement::zeros(space, n),
                "random" => {
                    let mut r = substream(run.seed, n as u64);
                    OsElement::from_flat(space, n, &gaussian_vector(&mut r, d * n * n, true))?
                }
                "special-c" => build_special(n, 1.0, space)?.c,
                "special-d" => build_special(n, 1.0, space)?.d,
                other => return Err(LabError::input(format!("unknown builtin {other:?}"))),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct NormEntry {
    space: String,
    n: usize,
    #[serde(flatten)]
    bounds: BoundsJson,
    width: f64,
    element: ElementJson,
}

pub fn norm(run: &mut Run) -> LabResult<Finished> {
    let xs = elements(run, "row", "3")?;
    let budget = run.opts.solver_budget()?;
    let csv = run.opts.format_is_csv();
    let certs = xs
        .par_iter()
        .map(|x| norm_with_budget(x, &budget))
        .collect::<opspace_core::Result<Vec<_>>>()?;
    let entries: Vec<NormEntry> = xs
        .iter()
        .zip(&certs)
        .map(|(x, c)| NormEntry {
            space: x.space().name(),
            n: x.n(),
            bounds: (*c).into(),
            width: c.width(),
            element: x.into(),
        })
        .collect();
    let meta = run.meta();
    let mut output = Output::default();
    output.add("norm.json", json_report(&meta, Status::Pass, json!({ "certificates": entries })));
    if csv {
        let rows = entries
            .iter()
            .map(|e| vec![e.n.to_string(), e.space.clone(), num(e.bounds.lower), num(e.bounds.upper), e.bounds.exact.to_string()])
            .collect::<Vec<_>>();
        output.add("norm.csv", csv_report(&meta, &[], &["n", "space", "lower", "upper", "exact"], &rows));
    }
    let summary = entries
        .iter()
        .map(|e| format!("n={} ‖x‖ ∈ [{}, {}]", e.n, e.bounds.lower, e.bounds.upper))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Finished {
        status: Status::Pass,
        summary,
        output,
    })
}

#[derive(Serialize)]
struct InterpEntry {
    n: usize,
    #[serde(flatten)]
    cert: InterpJson,
    /// Closed form, for Hilbert couples.
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_value: Option<f64>,
    contains_exact: Option<bool>,
}

/// Positive definite weight matrix `G G* + I/2`.
fn random_hpd(seed: u64, label: u64, dim: usize) -> LabResult<CMatrix> {
    let mut r = substream(seed, label);
    let g = gaussian_matrix(&mut r, dim, dim, true).scale_real(1.0 / (dim as f64).sqrt());
    let mut s = g.matmul(&g.adjoint())?;
    for i in 0..dim {
        s[(i, i)].re += 0.5;
    }
    Ok(s)
}

pub fn interp(run: &mut Run) -> LabResult<Finished> {
    let couple_kind = run.opts.couple.get_or_insert_with(|| "row".into()).clone();
    if !matches!(couple_kind.as_str(), "row" | "hilbert") {
        return Err(LabError::input(format!("unknown couple {couple_kind:?} (row, hilbert)")));
    }
    let thetas = run.opts.thetas("0,0.25,0.5,0.75,1")?;
    if thetas.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(LabError::input("theta values must lie in [0, 1]"));
    }
    let xs = elements(run, "row", "1..4")?;
    let budget = run.opts.solver_budget()?;
    let csv = run.opts.format_is_csv();
    let cells: Vec<(usize, f64)> = (0..xs.len()).flat_map(|i| thetas.iter().map(move |&t| (i, t))).collect();
    let seed = run.seed;
    let results = cells
        .par_iter()
        .map(|&(i, theta)| -> LabResult<Option<InterpEntry>> {
            if run.expired() {
                return Ok(None);
            }
            let x = &xs[i];
            let flat = x.flat();
            let dim = flat.len();
            let (couple, exact) = if couple_kind == "row" {
                (row_couple(x.n(), x.space().dim()), None)
            } else {
                let (s0, s1) = (random_hpd(seed, 2 * i as u64, dim)?, random_hpd(seed, 2 * i as u64 + 1, dim)?);
                let exact = hilbert_couple_exact(&s0, &s1, theta, &flat)?;
                (NormCouple::hilbert(s0, s1)?, Some(exact))
            };
            let cert = bracket(&flat, &couple, theta, &budget)?;
            let contains = exact.map(|v| cert.certificate().contains(v, 1e-9 * v.max(1.0)));
            Ok(Some(InterpEntry {
                n: x.n(),
                cert: cert.into(),
                exact_value: exact,
                contains_exact: contains,
            }))
        })
        .collect::<LabResult<Vec<_>>>()?;
    let partial = results.iter().any(Option::is_none);
    let entries: Vec<InterpEntry> = results.into_iter().flatten().collect();
    let passed = entries.iter().all(|e| !e.cert.violation && e.contains_exact != Some(false));
    let status = Status::from_flags(passed, partial);
    let meta = run.meta();
    let mut output = Output::default();
    if csv {
        let rows = entries
            .iter()
            .map(|e| {
                vec![
                    e.n.to_string(),
                    num(e.cert.theta),
                    num(e.cert.lower),
                    num(e.cert.upper),
                    e.cert.exact.to_string(),
                    e.cert.upper_kind.to_string(),
                    num(e.cert.margin),
                ]
            })
            .collect::<Vec<_>>();
        let summary = [("status", format!("{status:?}")), ("couple", couple_kind.clone())];
        output.add(
            "interp.csv",
            csv_report(&meta, &summary, &["n", "theta", "lower", "upper", "exact", "upper_kind", "margin"], &rows),
        );
    }
    output.add("interp.json", json_report(&meta, status, json!({ "couple": couple_kind, "certificates": entries })));
    Ok(Finished {
        status,
        summary: format!("{} brackets for the {couple_kind} couple", entries.len()),
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use opspace_core::OsDescriptor;

    #[test]
    fn hpd_weights_are_positive() {
        let s = random_hpd(1, 2, 4).unwrap();
        assert!(opspace_core::numerics::cholesky(&s).is_ok());
    }

    #[test]
    fn builtin_column_has_row_norm_one() {
        let mut run = Run {
            command: crate::options::Command::Norm,
            opts: Default::default(),
            seed: 1,
            deadline: None,
        };
        run.opts.n_range = Some("3".into());
        let xs = elements(&mut run, "row", "3").unwrap();
        assert_eq!(xs.len(), 1);
        assert_eq!(xs[0].space(), OsDescriptor::Row(3));
        assert!((opspace_core::opspaces::norm(&xs[0]).unwrap().upper - 1.0).abs() < 1e-12);
    }
}
