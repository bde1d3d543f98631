//! Report assembly. Outputs are built in memory and written at the end, so
//! a run's bytes depend only on its config and seed.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::LabResult;
use crate::options::{Command, Options};

pub const CODE_HASH: &str = env!("OPSPACE_CODE_HASH");

/// Provenance block embedded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub code_hash: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: Options,
}

impl Meta {
    pub fn new(command: Command, seed: u64, config: &Options) -> Self {
        Self {
            tool: "opspace-lab",
            version: env!("CARGO_PKG_VERSION"),
            code_hash: CODE_HASH,
            command: command.name(),
            seed,
            config: config.clone(),
        }
    }

    fn header_lines(&self) -> String {
        format!(
            "# {} {} code {}\n# command {} seed {}\n# config {}\n",
            self.tool,
            self.version,
            self.code_hash,
            self.command,
            self.seed,
            serde_json::to_string(&self.config).unwrap_or_default()
        )
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    VerificationFailed,
    BudgetExhausted,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::VerificationFailed => 2,
            Self::BudgetExhausted => 4,
        }
    }

    /// Budget exhaustion dominates a verification failure on the part computed.
    pub fn from_flags(passed: bool, partial: bool) -> Self {
        if partial {
            Self::BudgetExhausted
        } else if passed {
            Self::Pass
        } else {
            Self::VerificationFailed
        }
    }
}

/// `{meta, status, partial, ...body}` on one line, keys sorted.
pub fn json_report(meta: &Meta, status: Status, body: Value) -> String {
    let mut out = json!({
        "meta": meta,
        "status": status,
        "partial": status == Status::BudgetExhausted,
    });
    if let (Some(o), Value::Object(b)) = (out.as_object_mut(), body) {
        o.extend(b);
    }
    let mut s = serde_json::to_string(&out).expect("report serializes");
    s.push('\n');
    s
}

/// A CSV table preceded by `#` provenance lines and optional summary lines.
pub fn csv_report(meta: &Meta, summary: &[(&str, String)], header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = meta.header_lines();
    for (k, v) in summary {
        s.push_str(&format!("# {k} {v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    s.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv"));
    s
}

/// Files produced by a command, written in order.
#[derive(Default)]
pub struct Output {
    pub files: Vec<(String, String)>,
}

impl Output {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn write(&self, dir: &Path) -> LabResult<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, contents) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, contents)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

/// Shortest round-trip form, with an exponent for very small or large values.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite float")
    } else {
        format!("{v}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
