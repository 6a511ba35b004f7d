//! Seed handling.
//!
//! A run takes one 64-bit seed. Each component derives its own stream as
//! `splitmix64(seed ^ fnv1a64(label))`, so adding a component never shifts
//! the randomness seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn fnv1a64(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn child_seed(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(label))
}

pub fn rng_for(seed: u64, label: &str) -> Rng {
    Rng::seed_from_u64(child_seed(seed, label))
}
