//! Counter-based seed splitting: a run seed plus a job index gives an
//! independent, reproducible stream regardless of scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for job `job` of a run seeded with `seed`.
pub fn job_rng(seed: u64, job: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(job);
    rng
}

/// A derived `u64` seed for job `job`, for APIs that take a seed.
pub fn job_seed(seed: u64, job: u64) -> u64 {
    job_rng(seed, job).next_u64()
}
