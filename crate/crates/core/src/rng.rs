//! Keyed random streams. Every path draws from its own ChaCha stream chosen by
//! `(seed, purpose, path_index)`, so results do not depend on how paths are
//! scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose keys separating independent uses of the same `(seed, path_index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Driver,
    Bridge,
    MaxSampler,
    Auxiliary(u64),
}

impl Purpose {
    fn key(self) -> u64 {
        match self {
            Purpose::Driver => 0,
            Purpose::Bridge => 1,
            Purpose::MaxSampler => 2,
            Purpose::Auxiliary(k) => 16 + k,
        }
    }
}

/// SplitMix64 finalizer; spreads nearby keys over the seed space.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, purpose: Purpose, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ mix(purpose.key())));
    rng.set_stream(path_index);
    rng
}
