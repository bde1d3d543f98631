use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("system has no preimage (phase-one residual {residual:.3e})")]
    NoPreimage { residual: f64 },

    #[error("degenerate quotient: matrix has rank {rank}, expected {expected}")]
    DegenerateQuotient { rank: usize, expected: usize },

    #[error("descriptor {0} is not supported by this operation")]
    UnsupportedDescriptor(String),

    #[error("zero functional gives no lower bound")]
    DegenerateCertificate,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ordering error: need theta < gamma, got theta = {theta}, gamma = {gamma}")]
    Ordering { theta: f64, gamma: f64 },

    #[error("truncation too small: need coordinate dimension >= {needed}, have {have}")]
    Truncation { needed: usize, have: usize },

    #[error("bracket [{lower}, {upper}] excludes the target {target} (n = {n}, theta = {theta})")]
    BracketExcludesTarget { n: usize, theta: f64, lower: f64, upper: f64, target: f64 },

    #[error("grid mismatch: {0}")]
    Grid(String),

    #[error("map evaluation failed: {0}")]
    MapEvaluation(String),

    #[error("complex coordinates are not supported here: {0}")]
    ComplexUnsupported(&'static str),
}
