//! Keyed random streams: every (seed, purpose, entity, step) tuple gets its
//! own generator, so adding or removing one consumer never shifts the draws
//! of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Traffic = 1,
    Detection = 2,
    FalseAlarm = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_rng(seed: u64, stream: Stream, entity: u64, step: i64) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for part in [stream as u64, entity, step as u64] {
        h = splitmix64(h ^ part);
    }
    ChaCha8Rng::seed_from_u64(h)
}
