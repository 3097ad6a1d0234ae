//! Seeded random streams.
//!
//! Every stochastic routine draws from a ChaCha8 generator keyed by a master
//! seed and a stream index, so independent tasks own private streams and a
//! fixed seed reproduces output bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TaskRng = ChaCha8Rng;

/// Name recorded in output files next to the seed.
pub const GENERATOR_NAME: &str = "ChaCha8";

pub fn task_rng(seed: u64, stream: u64) -> TaskRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream index for task `index` within a named family of tasks.
pub fn stream_id(family: u32, index: u32) -> u64 {
    ((family as u64) << 32) | index as u64
}

pub(crate) mod family {
    pub const SAMPLE: u32 = 1;
    pub const TRACE_X: u32 = 2;
    pub const TRACE_Y: u32 = 3;
    pub const POISSON: u32 = 4;
    pub const TOMOGRAPHY: u32 = 5;
}
