//! Reproducible random streams.
//!
//! Every stochastic routine draws from ChaCha8 (`rand_chacha`). The 64-bit user
//! seed is expanded to a 256-bit key by `SeedableRng::seed_from_u64`, and work
//! item `i` (a Monte Carlo batch or a verification trial) reads stream `i` of
//! that key. Results therefore do not depend on how work items are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
