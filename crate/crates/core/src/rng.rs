//! Deterministic seeding helpers.
//!
//! Randomised routines draw from per-task ChaCha substreams derived from
//! `(seed, index)`, so results do not depend on scheduling or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream `index` of the generator seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
