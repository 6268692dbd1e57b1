//! Seed derivation.
//!
//! A run is identified by `(master seed, horizon index, seed)`. Its stream
//! seed is `splitmix64` folded over the three values in that order. Each run
//! then owns independent ChaCha8 streams: environment rewards, graph
//! sampling, policy randomization, and per-run instance draws such as a
//! latent coin. The split keeps actions independent of how many draws the
//! environment consumes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for the cell `(master, horizon_index, seed)`.
pub fn derive_run_seed(master: u64, horizon_index: u64, seed: u64) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ horizon_index);
    splitmix64(b ^ seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Environment = 1,
    Graph = 2,
    Policy = 3,
    Instance = 4,
}

pub fn stream(run_seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(which as u64);
    rng
}
