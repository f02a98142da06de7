//! Seeded randomness.
//!
//! Every random choice in the crate comes from `xoshiro256++` seeded through
//! SplitMix64 (`Xoshiro256PlusPlus::seed_from_u64`). Independent streams are
//! keyed by [`derive_seed`], so results do not depend on evaluation order or
//! thread count.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SimRng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// One SplitMix64 output step applied to `z`.
#[inline]
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a list of integers into one seed: `h ← splitmix64(h ⊕ part)` starting
/// from `h = 0`.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0u64, |h, &p| splitmix64(h ^ p))
}

/// Uniform double in `[0, 1)` from the top 53 bits of one 64-bit draw.
#[inline]
pub fn uniform01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform double in `[-h, h)`, as `h (2u - 1)`.
#[inline]
pub fn uniform_symmetric(rng: &mut impl RngCore, h: f64) -> f64 {
    h * (2.0 * uniform01(rng) - 1.0)
}
