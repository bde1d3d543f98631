//! Norm oracles against independent dense linear algebra, plus invariants.

use nalgebra::DMatrix;
use opspace_core::numerics::{CMatrix, C64};
use opspace_core::opspaces::{distance, norm, OsDescriptor, OsElement};
use opspace_core::rng::{gaussian_vector, seeded};
use proptest::prelude::*;

fn element(space: OsDescriptor, n: usize, seed: u64, complex: bool) -> OsElement {
    let mut r = seeded(seed);
    OsElement::from_flat(space, n, &gaussian_vector(&mut r, space.dim() * n * n, complex)).unwrap()
}

fn to_na(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn spectral(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().max()
}

/// `[A_1 … A_d]` and its transpose-stacked sibling.
fn blocks(x: &OsElement, horizontal: bool) -> DMatrix<C64> {
    let n = x.n();
    let d = x.space().dim();
    let (r, c) = if horizontal { (n, n * d) } else { (n * d, n) };
    DMatrix::from_fn(r, c, |i, j| {
        let (k, i, j) = if horizontal { (j / n, i, j % n) } else { (i / n, i % n, j) };
        x.coords()[k][(i, j)]
    })
}

fn exact_spaces(d: usize) -> Vec<OsDescriptor> {
    vec![
        OsDescriptor::Row(d),
        OsDescriptor::Column(d),
        OsDescriptor::RowOp(d),
        OsDescriptor::ColumnOp(d),
        OsDescriptor::Oh(d),
        OsDescriptor::MinLinf(d),
        OsDescriptor::IntersectRc(d),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn row_and_column_match_block_matrices(n in 1usize..4, d in 1usize..4, seed in any::<u64>()) {
        let x = element(OsDescriptor::Row(d), n, seed, true);
        let row = norm(&x).unwrap();
        prop_assert!(row.exact);
        prop_assert!((row.upper - spectral(&blocks(&x, true))).abs() <= 1e-9 * row.upper.max(1.0));
        let col = norm(&x.reinterpret(OsDescriptor::Column(d)).unwrap()).unwrap();
        prop_assert!((col.upper - spectral(&blocks(&x, false))).abs() <= 1e-9 * col.upper.max(1.0));
        let both = norm(&x.reinterpret(OsDescriptor::IntersectRc(d)).unwrap()).unwrap();
        prop_assert!((both.upper - row.upper.max(col.upper)).abs() <= 1e-9 * both.upper.max(1.0));
    }

    #[test]
    fn min_linf_is_the_largest_coordinate_evaluation(n in 1usize..4, d in 1usize..4, seed in any::<u64>()) {
        // A real MIN(ℓ∞^d) element is normed by the extreme points ±e_k of the dual ball.
        let x = element(OsDescriptor::MinLinf(d), n, seed, false);
        let want = x.coords().iter().map(|a| spectral(&to_na(a))).fold(0.0, f64::max);
        let got = norm(&x).unwrap();
        prop_assert!((got.upper - want).abs() <= 1e-9 * want.max(1.0));
    }

    #[test]
    fn certificates_are_ordered_and_homogeneous(n in 1usize..3, d in 1usize..4, seed in any::<u64>(), s in 0.0f64..10.0, phase in 0.0f64..6.3) {
        let mut spaces = exact_spaces(d);
        spaces.push(OsDescriptor::MinL1(d));
        for space in spaces {
            let x = element(space, n, seed, true);
            let c = norm(&x).unwrap();
            prop_assert!(0.0 <= c.lower && c.lower <= c.upper, "{}: {c:?}", space.name());
            let alpha = C64::from_polar(s, phase);
            let cs = norm(&x.scale(alpha)).unwrap();
            if space.has_exact_norm() {
                prop_assert!((cs.upper - s * c.upper).abs() <= 1e-9 * (s * c.upper).max(1.0), "{}", space.name());
            } else {
                // Brackets of multiples overlap the scaled bracket.
                prop_assert!(cs.lower <= s * c.upper * (1.0 + 1e-9) + 1e-12);
                prop_assert!(s * c.lower <= cs.upper * (1.0 + 1e-9) + 1e-12);
            }
        }
    }

    #[test]
    fn triangle_inequality(n in 1usize..4, d in 1usize..4, seed in any::<u64>()) {
        for space in exact_spaces(d) {
            let x = element(space, n, seed, true);
            let y = element(space, n, seed.wrapping_add(1), true);
            let lhs = norm(&x.add(&y).unwrap()).unwrap().upper;
            let rhs = norm(&x).unwrap().upper + norm(&y).unwrap().upper;
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12, "{}", space.name());
            prop_assert!((distance(&x, &y).unwrap().upper - norm(&x.sub(&y).unwrap()).unwrap().upper).abs() <= 1e-12);
        }
    }

    #[test]
    fn ruan_bimodule_bound(n in 1usize..4, d in 1usize..4, seed in any::<u64>()) {
        // ‖α x β‖ ≤ ‖α‖ ‖x‖ ‖β‖ for scalar matrices α, β.
        let mut r = seeded(seed ^ 0x5eed);
        let a = CMatrix::from_vec(n, n, gaussian_vector(&mut r, n * n, true)).unwrap();
        let b = CMatrix::from_vec(n, n, gaussian_vector(&mut r, n * n, true)).unwrap();
        let (na, nb) = (spectral(&to_na(&a)), spectral(&to_na(&b)));
        for space in exact_spaces(d) {
            let x = element(space, n, seed, true);
            let coords = x.coords().iter().map(|c| a.matmul(c).unwrap().matmul(&b).unwrap()).collect();
            let axb = OsElement::new(space, n, coords).unwrap();
            let lhs = norm(&axb).unwrap().upper;
            prop_assert!(lhs <= na * nb * norm(&x).unwrap().upper * (1.0 + 1e-9) + 1e-12, "{}", space.name());
        }
    }

    #[test]
    fn direct_sum_takes_the_maximum(n in 1usize..3, m in 1usize..3, d in 1usize..4, seed in any::<u64>()) {
        for space in exact_spaces(d) {
            let x = element(space, n, seed, true);
            let y = element(space, m, seed.wrapping_mul(3), true);
            let s = norm(&x.direct_sum(&y).unwrap()).unwrap().upper;
            let want = norm(&x).unwrap().upper.max(norm(&y).unwrap().upper);
            prop_assert!((s - want).abs() <= 1e-9 * want.max(1.0), "{}", space.name());
        }
    }
}

#[test]
fn min_l1_first_level_is_the_l1_norm() {
    for seed in 0..20 {
        let x = element(OsDescriptor::MinL1(4), 1, seed, true);
        let want: f64 = x.flat().iter().map(|z| z.norm()).sum();
        let c = norm(&x).unwrap();
        assert!(c.contains(want, 1e-9 * want), "{c:?} vs {want}");
    }
}

#[test]
fn oh_is_the_square_root_of_the_tensor_sum() {
    // ‖Σ A_k ⊗ Ā_k‖^{1/2}.
    for seed in 0..10 {
        let x = element(OsDescriptor::Oh(3), 2, seed, true);
        let mut t = DMatrix::<C64>::zeros(4, 4);
        for a in x.coords() {
            let a = to_na(a);
            t += a.kronecker(&a.map(|z| z.conj()));
        }
        let want = spectral(&t).sqrt();
        assert!((norm(&x).unwrap().upper - want).abs() <= 1e-9 * want);
    }
}

#[test]
fn zero_has_norm_zero_everywhere() {
    for space in exact_spaces(3).into_iter().chain([OsDescriptor::MinL1(3), OsDescriptor::InterpRc { d: 3, theta: 0.5 }]) {
        let c = norm(&OsElement::zeros(space, 2)).unwrap();
        assert_eq!((c.lower, c.upper), (0.0, 0.0), "{}", space.name());
    }
}
