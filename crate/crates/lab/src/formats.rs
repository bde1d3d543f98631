//! JSON form of elements and certificates.
//!
//! An element is `{"space": {...}, "n": n, "coords": [[[re, im], ...], ...]}`
//! with one row-major `n x n` list per coordinate matrix.

use opspace_core::interpolation::InterpCertificate;
use opspace_core::numerics::{CMatrix, C64};
use opspace_core::{NormCertificate, OsDescriptor, OsElement};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceJson {
    pub kind: String,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl From<OsDescriptor> for SpaceJson {
    fn from(s: OsDescriptor) -> Self {
        let (kind, theta) = match s {
            OsDescriptor::Row(_) => ("row", None),
            OsDescriptor::Column(_) => ("column", None),
            OsDescriptor::RowOp(_) => ("row-op", None),
            OsDescriptor::ColumnOp(_) => ("column-op", None),
            OsDescriptor::Oh(_) => ("oh", None),
            OsDescriptor::InterpRc { theta, .. } => ("interp-rc", Some(theta)),
            OsDescriptor::MinLinf(_) => ("min-linf", None),
            OsDescriptor::MinL1(_) => ("min-l1", None),
            OsDescriptor::IntersectRc(_) => ("intersect-rc", None),
        };
        Self {
            kind: kind.into(),
            d: s.dim(),
            theta,
        }
    }
}

impl SpaceJson {
    pub fn descriptor(&self) -> LabResult<OsDescriptor> {
        match (self.kind.as_str(), self.theta) {
            ("interp-rc", Some(t)) => crate::options::parse_space(&format!("interp-rc:{t}"), self.d),
            ("interp-rc", None) => Err(LabError::input("interp-rc space needs theta")),
            (kind, _) => crate::options::parse_space(kind, self.d),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub space: SpaceJson,
    pub n: usize,
    pub coords: Vec<Vec<[f64; 2]>>,
}

impl From<&OsElement> for ElementJson {
    fn from(x: &OsElement) -> Self {
        Self {
            space: x.space().into(),
            n: x.n(),
            coords: x.coords().iter().map(|c| c.as_slice().iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
    }
}

impl ElementJson {
    pub fn to_element(&self) -> LabResult<OsElement> {
        let space = self.space.descriptor()?;
        let n = self.n;
        if self.coords.len() != space.dim() {
            return Err(LabError::input(format!("{} coordinate matrices for {}", self.coords.len(), space.name())));
        }
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if c.len() != n * n {
                    return Err(LabError::input(format!("coordinate {k} has {} entries, expected {}", c.len(), n * n)));
                }
                if c.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(LabError::input(format!("coordinate {k} has a non-finite entry")));
                }
                Ok(CMatrix::from_vec(n, n, c.iter().map(|[re, im]| C64::new(*re, *im)).collect())?)
            })
            .collect::<LabResult<Vec<_>>>()?;
        Ok(OsElement::new(space, n, coords)?)
    }
}

/// Parses an element file; syntax errors carry `origin:line:column`.
pub fn parse_element(text: &str, origin: &str) -> LabResult<OsElement> {
    let json: ElementJson = serde_json::from_str(text)
        .map_err(|e| LabError::input(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
    json.to_element().map_err(|e| match e {
        LabError::Input(m) => LabError::input(format!("{origin}: {m}")),
        other => other,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundsJson {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl From<NormCertificate> for BoundsJson {
    fn from(c: NormCertificate) -> Self {
        Self {
            lower: c.lower,
            upper: c.upper,
            exact: c.exact,
        }
    }
}

/// `{theta, lower, upper, exact, upper_kind, margin}` plus solver flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpJson {
    pub theta: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub upper_kind: &'static str,
    pub margin: f64,
    pub fallback: bool,
    pub violation: bool,
}

impl From<InterpCertificate> for InterpJson {
    fn from(c: InterpCertificate) -> Self {
        Self {
            theta: c.theta,
            lower: c.lower,
            upper: c.upper,
            exact: c.exact,
            upper_kind: c.upper_kind.as_str(),
            margin: c.margin,
            fallback: c.fallback,
            violation: c.violation,
        }
    }
}
