//! Sampled moduli for maps whose moduli are known.

use opspace_core::coarse::{
    affine_bound_check, aggregate_equi, collapse_family, element_distance, estimate_moduli, evaluate_pair,
    expansion_witness, DomainSampler, Strategy, DEFAULT_GRID,
};
use opspace_core::opspaces::{OsDescriptor, OsElement};
use opspace_core::{NormCertificate, Result};
use proptest::prelude::*;

fn identity(x: &OsElement) -> Result<OsElement> {
    Ok(x.clone())
}

fn sampler(seed: u64, strategy: Strategy) -> DomainSampler {
    DomainSampler::new(OsDescriptor::Row(3), 2, 8.0, 0, seed, strategy)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn identity_moduli_bracket_the_grid(seed in any::<u64>()) {
        let rep = estimate_moduli(identity, element_distance, &sampler(seed, Strategy::UniformBall), &DEFAULT_GRID, 16).unwrap();
        for (k, &t) in rep.grid.iter().enumerate() {
            prop_assert!(rep.omega_lower[k] <= t + 1e-9);
            if let Some(rho) = rep.rho_upper[k] {
                prop_assert!(rho >= t - 1e-9);
            }
        }
    }

    #[test]
    fn witnesses_reproduce_their_values(seed in any::<u64>()) {
        let map = |x: &OsElement| Ok(x.scale_real(3.0));
        let rep = estimate_moduli(map, element_distance, &sampler(seed, Strategy::UniformBall), &DEFAULT_GRID, 8).unwrap();
        for (k, w) in rep.omega_witness.iter().enumerate() {
            if let Some(w) = *w {
                let rec = &rep.witnesses[w];
                let again = evaluate_pair(&rec.x, &rec.y, map, element_distance).unwrap();
                prop_assert_eq!(again.displacement.lower, rep.omega_lower[k]);
                prop_assert!(rec.distance.upper <= rep.grid[k]);
            }
        }
        for (k, w) in rep.rho_witness.iter().enumerate() {
            if let Some(w) = *w {
                let rec = &rep.witnesses[w];
                prop_assert_eq!(Some(rec.displacement.upper), rep.rho_upper[k]);
                prop_assert!(rec.distance.lower >= rep.grid[k]);
            }
        }
    }
}

#[test]
fn constant_maps_have_zero_moduli() {
    let zero = |_: &OsElement| Ok(OsElement::zeros(OsDescriptor::Column(1), 2));
    let rep = estimate_moduli(zero, element_distance, &sampler(5, Strategy::UniformBall), &DEFAULT_GRID, 8).unwrap();
    assert!(rep.omega_lower.iter().all(|w| *w == 0.0));
    assert!(rep.rho_upper.iter().flatten().all(|r| *r == 0.0));
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let s = sampler(42, Strategy::UniformBall);
    let a = estimate_moduli(identity, element_distance, &s, &DEFAULT_GRID, 8).unwrap();
    let b = estimate_moduli(identity, element_distance, &s, &DEFAULT_GRID, 8).unwrap();
    assert_eq!(a, b);
    let c = estimate_moduli(identity, element_distance, &sampler(43, Strategy::UniformBall), &DEFAULT_GRID, 8).unwrap();
    assert_ne!(a.witnesses, c.witnesses);
}

#[test]
fn sphere_samples_have_the_requested_radius() {
    let s = DomainSampler::new(OsDescriptor::Oh(2), 2, 3.0, 10, 9, Strategy::Sphere);
    for x in s.samples().unwrap() {
        let c = opspace_core::opspaces::norm(&x).unwrap();
        assert!((c.upper - 3.0).abs() <= 1e-9);
    }
    let bad = DomainSampler::new(OsDescriptor::MinL1(2), 2, 3.0, 10, 9, Strategy::Sphere);
    assert!(bad.samples().is_err());
}

#[test]
fn collapsing_family_loses_expansion() {
    let grid = [0.5, 1.0, 2.0];
    let mut margins = Vec::new();
    let mut reports = Vec::new();
    for n in [1usize, 4, 16] {
        let s = DomainSampler::new(OsDescriptor::Row(2 * n), n, 2.0, 0, 1, Strategy::Structured);
        let rep = estimate_moduli(collapse_family(n), element_distance, &s, &grid, 0).unwrap();
        margins.push(rep.rho_upper[1].unwrap());
        reports.push(rep);
    }
    assert!(margins.windows(2).all(|w| w[1] < w[0]), "{margins:?}");
    let equi = aggregate_equi(reports).unwrap();
    let v = expansion_witness(&equi, 1.0).unwrap();
    assert_eq!(v.margin, Some(margins[2]));
    assert_eq!(v.witness.map(|w| w.0), Some(2));
    assert!(expansion_witness(&equi, 3.0).is_err());
}

#[test]
fn affine_check_needs_unit_on_the_grid() {
    let s = sampler(3, Strategy::UniformBall);
    let rep = estimate_moduli(identity, element_distance, &s, &[0.5, 2.0], 4).unwrap();
    assert!(affine_bound_check(&rep).is_err());
    let rep = estimate_moduli(identity, element_distance, &s, &DEFAULT_GRID, 16).unwrap();
    let check = affine_bound_check(&rep).unwrap();
    // Only grid points where the sample beats L t + L are listed.
    for t in check.violations {
        let k = rep.grid.iter().position(|g| *g == t).unwrap();
        assert!(rep.omega_lower[k] > check.l * t + check.l);
    }
}

#[test]
fn bad_grids_are_rejected() {
    let s = sampler(1, Strategy::UniformBall);
    let d = |a: &OsElement, b: &OsElement| -> Result<NormCertificate> { element_distance(a, b) };
    assert!(estimate_moduli(identity, d, &s, &[], 4).is_err());
    assert!(estimate_moduli(identity, d, &s, &[1.0, 0.5], 4).is_err());
}
