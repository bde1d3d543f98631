//! Seeded random sources. Every sampler in the crate goes through here so a
//! seed fully determines a run.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::{CMatrix, C64};

pub type LabRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from a base seed and a label.
pub fn substream(seed: u64, label: u64) -> LabRng {
    // splitmix64 finalizer
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

pub fn normal(rng: &mut LabRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_normal(rng: &mut LabRng) -> C64 {
    C64::new(normal(rng), normal(rng))
}

pub fn uniform(rng: &mut LabRng) -> f64 {
    rng.random::<f64>()
}

pub fn gaussian_matrix(rng: &mut LabRng, rows: usize, cols: usize, complex: bool) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        if complex {
            complex_normal(rng)
        } else {
            C64::new(normal(rng), 0.0)
        }
    })
}

pub fn gaussian_vector(rng: &mut LabRng, len: usize, complex: bool) -> Vec<C64> {
    (0..len)
        .map(|_| {
            if complex {
                complex_normal(rng)
            } else {
                C64::new(normal(rng), 0.0)
            }
        })
        .collect()
}
