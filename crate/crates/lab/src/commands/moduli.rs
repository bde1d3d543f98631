//! `moduli`: sampled ω/ρ per matrix level with a witness sidecar.

use opspace_core::coarse::{
    aggregate_equi, collapse_family, element_distance, evaluate_pair, expansion_witness, moduli_from_records, DomainSampler,
    ModuliReport, Strategy,
};
use opspace_core::{OsDescriptor, OsElement, Result};
use rayon::prelude::*;
use serde_json::json;

use super::{Finished, Run};
use crate::error::{LabError, LabResult};
use crate::formats::{BoundsJson, ElementJson};
use crate::report::{csv_report, json_report, num, opt_num, Output, Status};

fn apply(map: &str, n: usize, x: &OsElement) -> Result<OsElement> {
    match map {
        "transpose" => x.amplify(OsDescriptor::Column(x.space().dim()), |v| Ok(v.to_vec())),
        "collapse" => collapse_family(n)(x),
        _ => Ok(x.clone()),
    }
}

pub fn moduli(run: &mut Run) -> LabResult<Finished> {
    let map = run.opts.map.get_or_insert_with(|| "identity".into()).clone();
    if !matches!(map.as_str(), "identity" | "transpose" | "collapse") {
        return Err(LabError::input(format!("unknown map {map:?} (identity, transpose, collapse)")));
    }
    let strategy = match run.opts.strategy.get_or_insert_with(|| "ball".into()).as_str() {
        "ball" => Strategy::UniformBall,
        "sphere" => Strategy::Sphere,
        "structured" => Strategy::Structured,
        other => return Err(LabError::input(format!("unknown strategy {other:?} (ball, sphere, structured)"))),
    };
    let ns = run.opts.ns("1..4")?;
    let grid = run.opts.grid_values("0.25,0.5,1,2,4,8")?;
    let radius = *run.opts.radius.get_or_insert(8.0);
    let per_cell = *run.opts.per_cell.get_or_insert(32);
    let d0 = *run.opts.truncation.get_or_insert(3);
    let space_name = run.opts.space.get_or_insert_with(|| "row".into()).clone();
    let csv = run.opts.format_is_csv();
    let seed = run.seed;

    let mut reports: Vec<ModuliReport> = Vec::new();
    let mut partial = false;
    for &n in &ns {
        if run.expired() {
            partial = true;
            break;
        }
        // Structured samples need room for 2n coordinates.
        let d = if strategy == Strategy::Structured { d0.max(2 * n) } else { d0 };
        let space = crate::options::parse_space(&space_name, d)?;
        let sampler = DomainSampler::new(space, n, radius, 0, seed.wrapping_add(n as u64), strategy);
        let pairs = sampler.pairs(&grid, per_cell)?;
        let records = pairs
            .par_iter()
            .map(|(x, y)| evaluate_pair(x, y, |v| apply(&map, n, v), element_distance))
            .collect::<Result<Vec<_>>>()?;
        reports.push(moduli_from_records(records, &grid)?);
    }
    if reports.is_empty() {
        return Err(LabError::input("time limit left no level to sample"));
    }

    // Witness ids are global across levels.
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    for (rep, &n) in reports.iter().zip(&ns) {
        let base = witnesses.len();
        for w in &rep.witnesses {
            witnesses.push(json!({
                "id": witnesses.len(),
                "n": n,
                "x": ElementJson::from(&w.x),
                "y": ElementJson::from(&w.y),
                "distance": BoundsJson::from(w.distance),
                "displacement": BoundsJson::from(w.displacement),
            }));
        }
        for (k, &t) in rep.grid.iter().enumerate() {
            rows.push((n, t, rep.omega_lower[k], rep.rho_upper[k], rep.omega_witness[k].map(|i| base + i), rep.rho_witness[k].map(|i| base + i)));
        }
    }
    let equi = aggregate_equi(reports)?;
    let expansion = if grid.contains(&1.0) {
        let v = expansion_witness(&equi, 1.0)?;
        json!({ "r": 1.0, "expanding": v.expanding, "margin": v.margin })
    } else {
        serde_json::Value::Null
    };
    let aggregate = json!({ "grid": equi.grid, "omega_lower": equi.omega_lower, "rho_upper": equi.rho_upper, "expansion": expansion });
    let status = Status::from_flags(true, partial);
    let meta = run.meta();
    let mut output = Output::default();
    let id = |v: Option<usize>| v.map(|i| i.to_string()).unwrap_or_default();
    if csv {
        let table = rows
            .iter()
            .map(|(n, t, w, r, ow, rw)| vec![n.to_string(), num(*t), num(*w), opt_num(*r), id(*ow), id(*rw)])
            .collect::<Vec<_>>();
        output.add(
            "moduli.csv",
            csv_report(
                &meta,
                &[("status", format!("{status:?}")), ("map", map.clone())],
                &["n", "t", "omega_lower", "rho_upper", "witness_id", "rho_witness_id"],
                &table,
            ),
        );
        output.add("moduli_witnesses.json", json_report(&meta, status, json!({ "aggregate": aggregate, "witnesses": witnesses })));
    } else {
        let table: Vec<_> = rows
            .iter()
            .map(|(n, t, w, r, ow, rw)| json!({"n": n, "t": t, "omega_lower": w, "rho_upper": r, "witness_id": ow, "rho_witness_id": rw}))
            .collect();
        output.add(
            "moduli.json",
            json_report(&meta, status, json!({ "rows": table, "aggregate": aggregate, "witnesses": witnesses })),
        );
    }
    Ok(Finished {
        status,
        summary: format!("{} levels, {} witnesses, map {map}", ns.len().min(equi.per_n.len()), witnesses.len()),
        output,
    })
}
