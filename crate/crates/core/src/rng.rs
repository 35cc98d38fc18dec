//! Seed derivation and the SplitMix64 generator used by every stochastic stage.
//!
//! Child seeds are derived from `(parent, label, index)` so that each stage and
//! each work item owns an independent stream. Results therefore do not depend
//! on scheduling order or on whether the parallel feature is enabled.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
pub use rand_xoshiro::SplitMix64;

/// 64-bit finalizer from SplitMix64.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed for the `index`-th work item of stage `label` under `parent`.
pub fn derive_seed(parent: u64, label: &str, index: u64) -> u64 {
    mix64(mix64(parent ^ fnv1a(label)).wrapping_add(index))
}

pub fn rng_from_seed(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

pub fn child_rng(parent: u64, label: &str, index: u64) -> SplitMix64 {
    rng_from_seed(derive_seed(parent, label, index))
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform pick from a nonempty slice.
pub fn pick<'a, T, R: Rng + ?Sized>(rng: &mut R, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}
