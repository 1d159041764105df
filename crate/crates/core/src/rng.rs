//! Seed derivation and counter-based uniforms.
//!
//! Streams are keyed by `(master seed, purpose tag, index)`. Per-pair and
//! per-point decisions in the thinning step use a stateless hash of
//! `(seed, replicate, point identities, direction)` so the outcome does not
//! depend on the order in which pairs are visited.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::Point;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// FNV-1a of a purpose tag.
pub fn hash_tag(tag: &str) -> u64 {
    tag.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let h = mix64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let h = mix64(h ^ hash_tag(tag));
    mix64(h ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Independent generator for one `(seed, tag, index)` triple.
pub fn stream(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, index))
}

#[inline]
fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Stable identity of a location, used to key per-point randomness.
#[inline]
pub fn point_id(p: &Point) -> u64 {
    let h = mix64(p[0].to_bits() ^ 0x243f_6a88_85a3_08d3);
    let h = mix64(h ^ p[1].to_bits());
    mix64(h ^ p[2].to_bits().rotate_left(17))
}

/// Key for the per-pair and per-point draws of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawKey(u64);

impl DrawKey {
    pub fn new(seed: u64, replicate: u64) -> Self {
        DrawKey(derive_seed(seed, "thinning", replicate))
    }

    /// Uniform deciding whether the point `killer` deletes the point `victim`.
    #[inline]
    pub fn pair_uniform(self, victim: u64, killer: u64) -> f64 {
        let (lo, hi, dir) = if victim < killer {
            (victim, killer, 0x5851_f42d_4c95_7f2du64)
        } else {
            (killer, victim, 0x1405_7b7e_f767_814fu64)
        };
        let x = mix64(self.0 ^ mix64(lo));
        to_unit(mix64(x ^ mix64(hi ^ dir)))
    }

    /// Uniform for the independent `p0` retention of one point.
    #[inline]
    pub fn point_uniform(self, id: u64) -> f64 {
        to_unit(mix64(mix64(self.0 ^ 0x2545_f491_4f6c_dd1d) ^ id))
    }
}
