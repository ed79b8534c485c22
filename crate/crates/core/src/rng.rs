//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by a 64-bit
//! seed. Child seeds are derived with [`split`], a SplitMix64 finalizer over
//! `(parent, index)`, so a profile's noise depends only on its own index and
//! never on how many other profiles were drawn before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

pub type Rng = ChaCha8Rng;

/// SplitMix64 mixing of a parent seed and a stream index.
pub fn split(parent: u64, index: u64) -> u64 {
    let mut z = parent
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Named sub-streams, hashed from an ASCII tag.
pub fn split_tag(parent: u64, tag: &str) -> u64 {
    let h = tag
        .bytes()
        .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x1000_0000_01B3));
    split(parent, h)
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<T: Scalar>(rng: &mut Rng) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z)
}

pub fn fill_normal<T: Scalar>(rng: &mut Rng, out: &mut [T]) {
    for v in out {
        *v = normal(rng);
    }
}
