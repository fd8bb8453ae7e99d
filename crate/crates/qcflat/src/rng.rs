//! Deterministic random streams.
//!
//! Every stochastic routine takes a u64 seed and derives independent
//! substreams from it, so identical (config, seed) pairs reproduce results
//! bit for bit regardless of how work is chunked.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Root generator for a seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `stream` of the generator for `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
