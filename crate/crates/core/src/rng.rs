//! Reproducible random streams keyed by (global seed, point index, purpose).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags so different draws at the same point stay independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Sampling = 1,
    Perturbation = 2,
    VectorField = 3,
    Scalar = 4,
    Potential = 5,
    Grid = 6,
    Metric = 7,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_rng(seed: u64, index: u64, stream: Stream) -> ChaCha8Rng {
    let key = splitmix(splitmix(splitmix(seed) ^ index) ^ stream as u64);
    ChaCha8Rng::seed_from_u64(key)
}
