//! Seed streams for reproducible ensembles.
//!
//! Every random object is drawn from a ChaCha8 stream addressed by a pair
//! `(seed, stream)`. ChaCha is counter based, so stream `k` of a master seed
//! can be produced on any thread without touching the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replica `index` in an ensemble driven by `master`.
///
/// Distinct `(master, index)` pairs give (with overwhelming probability)
/// distinct seeds; the map is a pure function so ensembles are reproducible
/// regardless of how replicas are scheduled.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Seed for an independent purpose (walks, bootstrap, ...) derived from a
/// replica seed. `purpose` is a small tag constant chosen by the caller.
pub fn purpose_seed(seed: u64, purpose: u64) -> u64 {
    mix64(seed.rotate_left(17) ^ mix64(purpose))
}
