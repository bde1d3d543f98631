//! Flags, the key-value config file and their resolution into run parameters.
//!
//! Every flag has a config-file key of the same name (without the leading
//! dashes). Flags win over the file; the file wins over command defaults.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use opspace_core::interpolation::Budget;
use opspace_core::OsDescriptor;
use serde::Serialize;

use crate::error::{LabError, LabResult};

#[derive(Parser, Debug)]
#[command(name = "opspace-lab", version, about = "Experiments on matricial norms, interpolation and Kalton-type constructions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Certified norms of builtin or file elements.
    Norm,
    /// Interpolation brackets on a grid of (n, θ).
    Interp,
    /// The column element in (R, R^op)_θ against n^{θ/2}.
    Lemma32,
    /// Growth-obstruction scan.
    Obstruction,
    /// Special-matrix identities and the divergence table.
    Prop31,
    /// Section, Z(Q) and equivalence-map checks.
    Kalton,
    /// Spherical-amplification gluing checks.
    SphereGlue,
    /// Sampled ω/ρ moduli with witnesses.
    Moduli,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Norm => "norm",
            Self::Interp => "interp",
            Self::Lemma32 => "lemma32",
            Self::Obstruction => "obstruction",
            Self::Prop31 => "prop31",
            Self::Kalton => "kalton",
            Self::SphereGlue => "sphere-glue",
            Self::Moduli => "moduli",
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Options {
    /// Key-value config file (`key = value` per line, `#` comments).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = one per core). Does not affect results.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub jobs: Option<usize>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Solver preset: quick, default or thorough.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<String>,
    /// Wall-clock limit in seconds; a run that hits it writes a partial report.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_limit: Option<f64>,
    /// `a..b`, `a..=b`, `a-b` or a single `n` (inclusive).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<String>,
    /// Comma-separated θ values.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    /// Coordinate dimension d of the truncated space.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,

    /// Space family: row, column, row-op, column-op, oh, min-linf, min-l1,
    /// intersect-rc or interp-rc:θ.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    /// Builtin element: lemma32-b, zero, random, special-c or special-d.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Element JSON file.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<PathBuf>,
    /// Interpolation couple: row or hilbert.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couple: Option<String>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// The constant D of the obstruction inequality.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_const: Option<f64>,
    /// The constant L of the obstruction inequality.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_const: Option<f64>,

    /// N for the sign-vector quotient `ℓ1^{2^{N−1}} → ℓ∞^N`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quotient_n: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Replace the section by one with `Q∘f ≠ id` (negative control).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<bool>,
    /// Last node of the interpolated witness family.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// The gluing constant K.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_k: Option<f64>,

    /// Map for moduli: identity, transpose or collapse.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    /// Sampler: ball, sphere or structured.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_cell: Option<usize>,
    /// Comma-separated distance grid.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("bad value {value:?} for {key}: {e}"))
}

macro_rules! fill_keys {
    ($self:ident, $key:ident, $value:ident; $($name:literal => $field:ident),* $(,)?) => {
        match $key {
            $($name => {
                let v = parse_value($name, $value)?;
                if $self.$field.is_none() {
                    $self.$field = Some(v);
                }
                Ok(())
            })*
            _ => Err(format!("unknown key {:?}", $key)),
        }
    };
}

pub const DEFAULT_SEED: u64 = 20_240_611;

impl Options {
    /// Fills unset options from one config-file entry.
    fn fill(&mut self, key: &str, value: &str) -> Result<(), String> {
        if key == "format" && !matches!(value, "csv" | "json") {
            return Err(format!("format must be csv or json, got {value:?}"));
        }
        fill_keys!(self, key, value;
            "out" => out, "jobs" => jobs, "seed" => seed, "budget" => budget, "time-limit" => time_limit,
            "n-range" => n_range, "theta" => theta, "truncation" => truncation, "format" => format,
            "space" => space, "builtin" => builtin, "element" => element, "couple" => couple,
            "gamma" => gamma, "r" => r, "d-const" => d_const, "l-const" => l_const,
            "quotient-n" => quotient_n, "samples" => samples, "fault" => fault, "nodes" => nodes,
            "big-k" => big_k, "map" => map, "strategy" => strategy, "radius" => radius,
            "per-cell" => per_cell, "grid" => grid,
        )
    }

    /// Applies a config file's text; errors carry `origin:line`.
    pub fn apply_config(&mut self, text: &str, origin: &str) -> LabResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LabError::input(format!("{origin}:{}: expected `key = value`", i + 1)))?;
            let key = key.trim().trim_start_matches("--");
            self.fill(key, value.trim()).map_err(|e| LabError::input(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn load_config_file(&mut self) -> LabResult<()> {
        if let Some(path) = self.config.clone() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| LabError::input(format!("cannot read config {}: {e}", path.display())))?;
            self.apply_config(&text, &path.display().to_string())?;
        }
        Ok(())
    }

    pub fn seed(&mut self) -> u64 {
        *self.seed.get_or_insert(DEFAULT_SEED)
    }

    pub fn ns(&mut self, default: &str) -> LabResult<Vec<usize>> {
        parse_range(self.n_range.get_or_insert_with(|| default.into()))
    }

    pub fn thetas(&mut self, default: &str) -> LabResult<Vec<f64>> {
        parse_list(self.theta.get_or_insert_with(|| default.into()), "theta")
    }

    pub fn grid_values(&mut self, default: &str) -> LabResult<Vec<f64>> {
        parse_list(self.grid.get_or_insert_with(|| default.into()), "grid")
    }

    pub fn solver_budget(&mut self) -> LabResult<Budget> {
        let name = self.budget.get_or_insert_with(|| "default".into());
        match name.as_str() {
            "quick" => Ok(Budget {
                modes: 6,
                opt_points: 48,
                cert_points: 2048,
                iterations: 80,
                ..Budget::default()
            }),
            "default" => Ok(Budget::default()),
            "thorough" => Ok(Budget {
                modes: 12,
                opt_points: 96,
                cert_points: 65536,
                iterations: 300,
                ..Budget::default()
            }),
            other => Err(LabError::input(format!("unknown budget preset {other:?} (quick, default, thorough)"))),
        }
    }

    pub fn deadline(&self, start: Instant) -> LabResult<Option<Instant>> {
        match self.time_limit {
            None => Ok(None),
            Some(s) if s.is_finite() && s >= 0.0 => Ok(Some(start + Duration::from_secs_f64(s))),
            Some(s) => Err(LabError::input(format!("time-limit {s} must be a nonnegative number of seconds"))),
        }
    }

    pub fn format_is_csv(&mut self) -> bool {
        self.format.get_or_insert_with(|| "csv".into()) == "csv"
    }

    pub fn descriptor(&mut self, default: &str, d: usize) -> LabResult<OsDescriptor> {
        parse_space(self.space.get_or_insert_with(|| default.into()), d)
    }
}

pub fn parse_range(s: &str) -> LabResult<Vec<usize>> {
    let bad = || LabError::input(format!("bad n-range {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once('-') {
        (num(a)?, num(b)?)
    } else {
        let n = num(s)?;
        (n, n)
    };
    if lo == 0 || lo > hi {
        return Err(LabError::input(format!("n-range {s:?} must be nonempty with n >= 1")));
    }
    Ok((lo..=hi).collect())
}

pub fn parse_list(s: &str, what: &str) -> LabResult<Vec<f64>> {
    let vals = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| LabError::input(format!("bad {what} value {t:?}"))))
        .collect::<LabResult<Vec<f64>>>()?;
    if vals.is_empty() || vals.iter().any(|v| !v.is_finite()) {
        return Err(LabError::input(format!("{what} list {s:?} must be nonempty and finite")));
    }
    Ok(vals)
}

pub fn parse_space(s: &str, d: usize) -> LabResult<OsDescriptor> {
    let desc = match s.split_once(':') {
        Some(("interp-rc" | "interp", t)) => OsDescriptor::InterpRc {
            d,
            theta: t.trim().parse().map_err(|_| LabError::input(format!("bad theta in space {s:?}")))?,
        },
        Some(_) => return Err(LabError::input(format!("unknown space {s:?}"))),
        None => match s {
            "row" => OsDescriptor::Row(d),
            "column" => OsDescriptor::Column(d),
            "row-op" => OsDescriptor::RowOp(d),
            "column-op" => OsDescriptor::ColumnOp(d),
            "oh" => OsDescriptor::Oh(d),
            "min-linf" => OsDescriptor::MinLinf(d),
            "min-l1" => OsDescriptor::MinL1(d),
            "intersect-rc" => OsDescriptor::IntersectRc(d),
            _ => return Err(LabError::input(format!("unknown space {s:?}"))),
        },
    };
    desc.validate().map_err(|e| LabError::input(e.to_string()))?;
    Ok(desc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_range("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_range("3-5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert!(parse_range("0..2").is_err());
        assert!(parse_range("4..2").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let mut o = Options {
            seed: Some(5),
            ..Options::default()
        };
        o.apply_config("# comment\nseed = 9\ntheta = 0.5, 0.75  # trailing\n\nformat=json\n", "cfg").unwrap();
        assert_eq!(o.seed, Some(5));
        assert_eq!(o.theta.as_deref(), Some("0.5, 0.75"));
        assert_eq!(o.thetas("0").unwrap(), vec![0.5, 0.75]);
        assert!(!o.format_is_csv());
    }

    #[test]
    fn config_errors_name_the_line() {
        let mut o = Options::default();
        let e = o.apply_config("seed = 1\nbogus = 2\n", "run.cfg").unwrap_err();
        assert!(e.to_string().contains("run.cfg:2"), "{e}");
        let e = Options::default().apply_config("seed = x\n", "run.cfg").unwrap_err();
        assert!(e.to_string().contains("run.cfg:1"), "{e}");
        assert!(Options::default().apply_config("format = xml\n", "c").is_err());
    }

    #[test]
    fn spaces() {
        assert_eq!(parse_space("oh", 3).unwrap(), OsDescriptor::Oh(3));
        assert_eq!(parse_space("interp-rc:0.25", 2).unwrap(), OsDescriptor::InterpRc { d: 2, theta: 0.25 });
        assert!(parse_space("interp-rc:2", 2).is_err());
        assert!(parse_space("max", 2).is_err());
    }
}
