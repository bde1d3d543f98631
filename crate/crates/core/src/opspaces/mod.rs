//! Truncated operator spaces with a distinguished basis.
//!
//! An element of `M_n(X)` is stored as `d` coordinate matrices `A_1..A_d`
//! (each `n x n`), representing `[x_ij]` with `x_ij = Σ_k (A_k)_ij e_k`.

mod cb;
mod element;
mod norms;

pub use cb::{cb_norm_truncated, cb_norm_truncated_seeded, CbEstimate, LinearCoordMap};
pub use element::OsElement;
pub use norms::{
    column_norm, distance, dual_norm, min_l1_bracket, min_l1_bracket_with, min_l1_norming_phases, min_linf_norm, norm, norm_with_budget,
    oh_norm, oracle_for, row_couple, row_norm, EmbeddedNorm, Embedding, HilbertNorm, MaxNorm, NormKind, NormOracle,
};

use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};

/// Which concrete space an element lives in, with its coordinate dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OsDescriptor {
    /// Row space `R = span{e_{1,j}}`.
    Row(usize),
    /// Column space `C = span{e_{j,1}}`.
    Column(usize),
    RowOp(usize),
    ColumnOp(usize),
    /// Operator Hilbert space.
    Oh(usize),
    /// `(R, C)_θ`, identified with `(R, R^op)_θ` on shared coordinates.
    InterpRc { d: usize, theta: f64 },
    /// `MIN(ℓ∞^N)`.
    MinLinf(usize),
    /// `MIN(ℓ1^M)`.
    MinL1(usize),
    /// `R ∩ C` inside `R ⊕_∞ C`.
    IntersectRc(usize),
}

impl OsDescriptor {
    pub fn dim(&self) -> usize {
        match *self {
            Self::Row(d)
            | Self::Column(d)
            | Self::RowOp(d)
            | Self::ColumnOp(d)
            | Self::Oh(d)
            | Self::MinLinf(d)
            | Self::MinL1(d)
            | Self::IntersectRc(d) => d,
            Self::InterpRc { d, .. } => d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::InvalidParameter(format!("{} has dimension zero", self.name())));
        }
        if let Self::InterpRc { theta, .. } = *self {
            if !(0.0..=1.0).contains(&theta) || theta.is_nan() {
                return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Same family with a different coordinate dimension.
    pub fn with_dim(&self, d: usize) -> Self {
        match *self {
            Self::Row(_) => Self::Row(d),
            Self::Column(_) => Self::Column(d),
            Self::RowOp(_) => Self::RowOp(d),
            Self::ColumnOp(_) => Self::ColumnOp(d),
            Self::Oh(_) => Self::Oh(d),
            Self::InterpRc { theta, .. } => Self::InterpRc { d, theta },
            Self::MinLinf(_) => Self::MinLinf(d),
            Self::MinL1(_) => Self::MinL1(d),
            Self::IntersectRc(_) => Self::IntersectRc(d),
        }
    }

    /// Whether `norm` returns an exact value (as opposed to a bracket).
    pub fn has_exact_norm(&self) -> bool {
        !matches!(self, Self::MinL1(_))
            && !matches!(self, Self::InterpRc { theta, .. } if *theta != 0.0 && *theta != 1.0)
    }

    pub fn name(&self) -> String {
        match *self {
            Self::Row(d) => format!("Row({d})"),
            Self::Column(d) => format!("Column({d})"),
            Self::RowOp(d) => format!("RowOp({d})"),
            Self::ColumnOp(d) => format!("ColumnOp({d})"),
            Self::Oh(d) => format!("OH({d})"),
            Self::InterpRc { d, theta } => format!("InterpRC({d}, {theta})"),
            Self::MinLinf(d) => format!("MinLinf({d})"),
            Self::MinL1(d) => format!("MinL1({d})"),
            Self::IntersectRc(d) => format!("IntersectRC({d})"),
        }
    }
}

/// Validated bounds `lower <= ‖x‖ <= upper`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormCertificate {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl NormCertificate {
    pub fn exact(value: f64) -> Self {
        Self {
            lower: value,
            upper: value,
            exact: true,
        }
    }

    /// Bracket `[lower, upper]`; marked exact when the two agree to 1e-8
    /// relative.
    pub fn bracket(lower: f64, upper: f64) -> Self {
        let lower = lower.max(0.0);
        let upper = upper.max(lower);
        Self {
            lower,
            upper,
            exact: upper - lower <= 1e-8 * upper.max(1.0),
        }
    }

    /// Point estimate used when a single number is needed for reporting.
    pub fn value(&self) -> f64 {
        if self.exact {
            self.upper
        } else {
            0.5 * (self.lower + self.upper)
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }

    pub fn scale(&self, s: f64) -> Self {
        let s = s.abs();
        Self {
            lower: self.lower * s,
            upper: self.upper * s,
            exact: self.exact,
        }
    }

    /// Certificate of `max(a, b)` given certificates of `a` and `b`.
    pub fn max(&self, other: &Self) -> Self {
        let lower = self.lower.max(other.lower);
        let upper = self.upper.max(other.upper);
        let exact = (self.exact && other.exact) || (self.exact && self.lower >= other.upper) || (other.exact && other.lower >= self.upper);
        Self { lower, upper, exact }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_validation() {
        assert!(OsDescriptor::Row(0).validate().is_err());
        assert!(OsDescriptor::InterpRc { d: 2, theta: 1.5 }.validate().is_err());
        assert!(OsDescriptor::InterpRc { d: 2, theta: 0.5 }.validate().is_ok());
    }

    #[test]
    fn certificate_max_keeps_exactness_when_one_side_dominates() {
        let a = NormCertificate::exact(3.0);
        let b = NormCertificate::bracket(1.0, 2.0);
        let m = a.max(&b);
        assert!(m.exact);
        assert_eq!(m.upper, 3.0);
        let c = NormCertificate::bracket(2.5, 3.5);
        assert!(!a.max(&c).exact);
    }
}
