//! Seeding for the stochastic regressors.
//!
//! Every random draw comes from ChaCha8 keyed by the run seed, on a stream
//! selected by the estimator index. Estimator `e` of an ensemble therefore
//! sees the same random sequence whether the ensemble has 25 or 200 members,
//! and whether members are fitted sequentially or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for estimator `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
