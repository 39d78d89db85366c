//! Seed derivation for reproducible, parallel-safe random streams.
//!
//! Every random decision in the toolkit draws from a [`ChaCha8Rng`] seeded by
//! mixing a master seed with a path of integer tags, so work items can be
//! evaluated in any order (or in parallel) and still see the same stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and a sequence of tags.
pub fn derive(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(base), |acc, &t| mix(acc ^ mix(t)))
}

/// Hashes a short string label into a tag usable with [`derive`].
pub fn tag(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x1000_0000_01b3)
    })
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(base: u64, tags: &[u64]) -> Rng {
    seeded(derive(base, tags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn derived_streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, &[1, 2]).random();
        let b: u64 = stream(7, &[1, 2]).random();
        let c: u64 = stream(7, &[2, 1]).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(derive(1, &[]), derive(2, &[]));
    }
}
