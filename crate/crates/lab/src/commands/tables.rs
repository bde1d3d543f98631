//! `lemma32`, `obstruction` and `prop31`.

use opspace_core::obstruction::{
    build_special, growth_obstruction, lemma32_row, prop31_divergence, symmetric_reduction, transpose_candidate,
    Lemma32Row,
};
use opspace_core::OsDescriptor;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{Finished, Run};
use crate::error::{LabError, LabResult};
use crate::formats::BoundsJson;
use crate::report::{csv_report, json_report, num, Output, Status};

/// Lower bound must hit `n^{θ/2}` to this absolute tolerance.
const DUAL_TOL: f64 = 1e-6;
/// Upper bound may exceed the target by this relative amount.
const UPPER_SLACK: f64 = 0.05;

#[derive(Serialize)]
struct Lemma32Entry {
    n: usize,
    theta: f64,
    target: f64,
    dual_lower: f64,
    upper: f64,
    width: f64,
    pass: bool,
}

impl From<Lemma32Row> for Lemma32Entry {
    fn from(r: Lemma32Row) -> Self {
        let pass = (r.dual_lower - r.target).abs() <= DUAL_TOL
            && r.upper >= r.target * (1.0 - 1e-9)
            && r.upper <= r.target * (1.0 + UPPER_SLACK);
        Self {
            n: r.n,
            theta: r.theta,
            target: r.target,
            dual_lower: r.dual_lower,
            upper: r.upper,
            width: r.width,
            pass,
        }
    }
}

pub fn lemma32(run: &mut Run) -> LabResult<Finished> {
    let ns = run.opts.ns("1..6")?;
    let thetas = run.opts.thetas("0,0.25,0.5,0.75,1")?;
    if thetas.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(LabError::input("theta values must lie in [0, 1]"));
    }
    let budget = run.opts.solver_budget()?;
    let csv = run.opts.format_is_csv();
    let cells: Vec<(usize, f64)> = ns.iter().flat_map(|&n| thetas.iter().map(move |&t| (n, t))).collect();
    let rows = cells
        .par_iter()
        .map(|&(n, theta)| -> LabResult<Option<Lemma32Entry>> {
            if run.expired() {
                return Ok(None);
            }
            match lemma32_row(n, theta, &budget) {
                Ok(row) => Ok(Some(row.into())),
                // Reported as a failing row rather than aborting the table.
                Err(opspace_core::Error::BracketExcludesTarget { lower, upper, target, .. }) => Ok(Some(Lemma32Entry {
                    n,
                    theta,
                    target,
                    dual_lower: lower,
                    upper,
                    width: upper - lower,
                    pass: false,
                })),
                Err(e) => Err(e.into()),
            }
        })
        .collect::<LabResult<Vec<_>>>()?;
    let partial = rows.iter().any(Option::is_none);
    let rows: Vec<Lemma32Entry> = rows.into_iter().flatten().collect();
    let passed = rows.iter().all(|r| r.pass);
    let status = Status::from_flags(passed, partial);
    let meta = run.meta();
    let mut output = Output::default();
    if csv {
        let table = rows
            .iter()
            .map(|r| vec![r.n.to_string(), num(r.theta), num(r.target), num(r.dual_lower), num(r.upper), num(r.width)])
            .collect::<Vec<_>>();
        output.add(
            "lemma32.csv",
            csv_report(&meta, &[("status", format!("{status:?}"))], &["n", "theta", "target", "dual_lower", "upper", "width"], &table),
        );
    } else {
        output.add("lemma32.json", json_report(&meta, status, json!({ "rows": rows })));
    }
    let worst = rows.iter().map(|r| (r.dual_lower - r.target).abs()).fold(0.0, f64::max);
    Ok(Finished {
        status,
        summary: format!("{} cells, worst |dual − target| {worst:.2e}", rows.len()),
        output,
    })
}

pub fn obstruction(run: &mut Run) -> LabResult<Finished> {
    let thetas = run.opts.thetas("0.5")?;
    let [theta] = thetas[..] else {
        return Err(LabError::input("obstruction takes exactly one theta"));
    };
    let gamma = *run.opts.gamma.get_or_insert(1.0);
    let r = *run.opts.r.get_or_insert(1.0);
    let d = *run.opts.d_const.get_or_insert(1.0);
    let l = *run.opts.l_const.get_or_insert(1.0);
    let ns = run.opts.ns("1..1000")?;
    let csv = run.opts.format_is_csv();
    // θ > γ is scanned through the symmetric pair; θ = γ is an ordering error.
    let reduced = theta > gamma;
    let (t, g) = if reduced { symmetric_reduction(theta, gamma) } else { (theta, gamma) };
    let rep = growth_obstruction(t, g, r, d, l, ns[0]..=*ns.last().expect("nonempty"))?;
    // Past the closed form every scanned n must violate the inequality.
    let sufficient = rep.rows.iter().filter(|row| row.n as f64 >= rep.closed_form).all(|row| row.violated);
    let status = Status::from_flags(sufficient, false);
    let summary = json!({
        "theta": theta,
        "gamma": gamma,
        "reduced": reduced,
        "scanned_theta": t,
        "scanned_gamma": g,
        "first_violation": rep.first_violation,
        "closed_form": rep.closed_form,
        "closed_form_beyond_range": rep.closed_form_beyond_range,
        "closed_form_matches_scan": rep.first_violation.map(|n| n as f64) == Some(rep.closed_form),
        "violated_beyond_closed_form": sufficient,
    });
    let meta = run.meta();
    let mut output = Output::default();
    if csv {
        let table = rep
            .rows
            .iter()
            .map(|row| vec![row.n.to_string(), num(row.lhs), num(row.rhs), row.violated.to_string()])
            .collect::<Vec<_>>();
        output.add(
            "obstruction.csv",
            csv_report(&meta, &[("summary", summary.to_string())], &["n", "lhs", "rhs", "violated"], &table),
        );
    } else {
        let rows: Vec<_> = rep
            .rows
            .iter()
            .map(|row| json!({"n": row.n, "lhs": row.lhs, "rhs": row.rhs, "violated": row.violated}))
            .collect();
        output.add("obstruction.json", json_report(&meta, status, json!({ "summary": summary, "rows": rows })));
    }
    Ok(Finished {
        status,
        summary: format!(
            "first violation {:?}, closed form {}{}",
            rep.first_violation,
            rep.closed_form,
            if reduced { " (symmetric reduction)" } else { "" }
        ),
        output,
    })
}

#[derive(Serialize)]
struct Prop31Entry {
    n: usize,
    stacked: f64,
    distance_cd: BoundsJson,
    rho_witness: f64,
    sqrt_n_rho: f64,
    omega_side: f64,
    identity_error: f64,
    pass: bool,
}

pub fn prop31(run: &mut Run) -> LabResult<Finished> {
    let ns = run.opts.ns("1..8")?;
    let r = *run.opts.r.get_or_insert(1.0);
    if !(r.is_finite() && r > 0.0) {
        return Err(LabError::input("r must be positive"));
    }
    let csv = run.opts.format_is_csv();
    let s2 = std::f64::consts::SQRT_2;
    let rows = ns
        .par_iter()
        .map(|&n| -> LabResult<Option<Prop31Entry>> {
            if run.expired() {
                return Ok(None);
            }
            let s = build_special(n, r, OsDescriptor::Row(2 * n))?.norms()?;
            let identity_error = [(s.a, r), (s.b, r), (s.a_minus_b, s2 * r), (s.c, r), (s.d, r), (s.c_minus_d, s2 * r)]
                .iter()
                .map(|(c, want)| (c.lower - want).abs().max((c.upper - want).abs()))
                .fold(0.0, f64::max);
            let row = prop31_divergence(&[n], r, OsDescriptor::Row(2), OsDescriptor::Column(2), transpose_candidate)?[0];
            let stacking = (row.stacked - row.distance_cd.upper).abs().max((row.stacked - row.distance_cd.lower).abs());
            let pass = identity_error <= 1e-9
                && stacking <= 1e-9
                && row.stacked >= row.sqrt_n_rho - 1e-9
                && row.omega_side <= s2 * r + 1e-9;
            Ok(Some(Prop31Entry {
                n,
                stacked: row.stacked,
                distance_cd: row.distance_cd.into(),
                rho_witness: row.rho_witness,
                sqrt_n_rho: row.sqrt_n_rho,
                omega_side: row.omega_side,
                identity_error,
                pass,
            }))
        })
        .collect::<LabResult<Vec<_>>>()?;
    let partial = rows.iter().any(Option::is_none);
    let rows: Vec<Prop31Entry> = rows.into_iter().flatten().collect();
    let status = Status::from_flags(rows.iter().all(|e| e.pass), partial);
    let meta = run.meta();
    let mut output = Output::default();
    if csv {
        let table = rows
            .iter()
            .map(|e| {
                vec![
                    e.n.to_string(),
                    num(e.stacked),
                    num(e.distance_cd.lower),
                    num(e.distance_cd.upper),
                    num(e.rho_witness),
                    num(e.sqrt_n_rho),
                    num(e.omega_side),
                    num(e.identity_error),
                ]
            })
            .collect::<Vec<_>>();
        output.add(
            "prop31.csv",
            csv_report(
                &meta,
                &[("status", format!("{status:?}"))],
                &["n", "stacked", "distance_lower", "distance_upper", "rho_witness", "sqrt_n_rho", "omega_side", "identity_error"],
                &table,
            ),
        );
    } else {
        output.add("prop31.json", json_report(&meta, status, json!({ "r": r, "rows": rows })));
    }
    Ok(Finished {
        status,
        summary: format!("{} rows, all identities hold: {}", rows.len(), rows.iter().all(|e| e.pass)),
        output,
    })
}
