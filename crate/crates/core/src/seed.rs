//! Seed derivation for the independent random streams of a run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used with [`ChaCha8Rng::set_stream`] so that streams derived from
/// the same seed never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Device = 0,
    Init = 1,
    Data = 2,
    Selection = 3,
    Eval = 4,
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// The sampling stream owned by one device: `global_seed ^ device_id`.
pub fn device_rng(global_seed: u64, device: usize) -> ChaCha8Rng {
    rng(global_seed ^ device as u64, Stream::Device)
}

/// Mixes extra coordinates (round, device, ...) into a seed.
pub fn mix(seed: u64, parts: &[u64]) -> u64 {
    // splitmix64 finalizer over each part
    let mut h = seed;
    for &p in parts {
        h ^= p
            .wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(h << 6)
            .wrapping_add(h >> 2);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    h
}
