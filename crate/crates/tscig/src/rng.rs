//! Deterministic RNG stream derivation.
//!
//! Every randomized stage derives its own ChaCha stream from the master seed
//! and a list of integer tags (purpose, replicate, community, ...), so a
//! cell's randomness never depends on which other cells run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// splitmix64 finalizer; good avalanche for seed mixing.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a tag path.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut s = mix(master);
    for &t in tags {
        s = mix(s ^ mix(t));
    }
    s
}

/// Stream for a given tag path.
pub fn stream(master: u64, tags: &[u64]) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(master, tags))
}

/// Tag namespaces for the experiment pipeline.
pub mod tag {
    pub const MODEL: u64 = 1;
    pub const NOISE: u64 = 2;
}
