//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`Rng`], a ChaCha8 stream
//! seeded from a single `u64`. Experiments derive independent per-context
//! seeds with [`derive_seed`], which mixes the master seed, a purpose tag and
//! a list of indices through the SplitMix64 finalizer. Results are therefore
//! identical across runs and independent of the order in which trials are
//! scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Seed used when a caller does not provide one.
pub const DEFAULT_SEED: u64 = 20_240_917;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn tag_hash(tag: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Derives a seed for one context (e.g. one trial of one grid cell).
pub fn derive_seed(master: u64, tag: &str, indices: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ splitmix64(tag_hash(tag)));
    for &i in indices {
        h = splitmix64(h ^ splitmix64(i.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_seed(1, "phase", &[0, 1, 2]);
        assert_eq!(a, derive_seed(1, "phase", &[0, 1, 2]));
        assert_ne!(a, derive_seed(1, "phase", &[0, 2, 1]));
        assert_ne!(a, derive_seed(1, "noisy", &[0, 1, 2]));
        assert_ne!(a, derive_seed(2, "phase", &[0, 1, 2]));
    }

    #[test]
    fn same_seed_same_stream() {
        let mut r1 = rng_from_seed(9);
        let mut r2 = rng_from_seed(9);
        for _ in 0..16 {
            assert_eq!(r1.next_u64(), r2.next_u64());
        }
    }
}
