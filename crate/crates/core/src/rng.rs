//! Seeded random streams. Every random quantity in the crate flows from a
//! `u64` seed through ChaCha8, so runs are reproducible bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of `seed`; used to give each trial its own
/// generator regardless of the order trials run in.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` of experiment cell `cell`.
pub fn trial_stream(cell: u32, trial: u32) -> u64 {
    (u64::from(cell) << 32) | u64::from(trial)
}
