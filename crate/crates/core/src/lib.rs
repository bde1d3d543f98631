//! Numerical laboratory for finite truncations of operator spaces.
//!
//! The crate computes matricial norms `‖·‖_{M_n(X)}` for row, column, opposite,
//! OH, MIN and complex-interpolated structures, produces certified
//! `(lower, upper)` brackets where a closed form is unavailable, and implements
//! the explicit nonlinear constructions used to compare operator spaces up to
//! coarse equivalence: homogeneous sections of quotient maps, the Kalton sum
//! `Z(Q)`, and spherical-amplification gluing.
//!
//! Everything here is pure computation on owned values. The crate is `no_std`
//! (with `alloc`) when the default `std` feature is disabled; file formats,
//! parallel sweeps and the command line live in the companion `opspace-lab`
//! crate.
//!
//! Module map:
//!
//! * [`numerics`]: dense complex matrices, SVD, Kronecker products and the
//!   minimum-ℓ1 preimage simplex.
//! * [`opspaces`]: space descriptors, elements of `M_n(X)` and norm oracles.
//! * [`interpolation`]: complex-method brackets for finite-dimensional couples.
//! * [`coarse`]: sampled estimates of the moduli `ω_f` and `ρ_f`.
//! * [`kalton`]: quotient sections, `Y_m`, `Z(Q)`, equivalence maps and gluing.
//! * [`obstruction`]: the special column matrices, exact interpolation values
//!   and the growth-obstruction inequality.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod coarse;
pub mod error;
pub mod interpolation;
pub mod kalton;
pub mod numerics;
pub mod obstruction;
pub mod opspaces;
pub mod rng;

pub use error::{Error, Result};
pub use numerics::{CMatrix, C64};
pub use opspaces::{NormCertificate, OsDescriptor, OsElement};

/// Absolute slack added to certified bounds to absorb floating-point rounding.
pub const CERT_SLACK: f64 = 1e-9;
