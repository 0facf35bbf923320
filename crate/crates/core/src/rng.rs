//! Seeded generator streams.
//!
//! Every randomized routine takes an explicit `u64` seed. Work that is split
//! into indexed pieces (Monte Carlo replicates, trials) draws piece `i` from
//! stream `i` of the ChaCha generator keyed by the seed, so results do not
//! depend on which worker ran which piece.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for a whole call keyed by `seed`.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
