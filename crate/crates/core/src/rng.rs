//! Deterministic random streams.
//!
//! Every Monte Carlo draw is keyed by `(master seed, index)`: the master
//! seed selects the ChaCha key and the index selects the stream, so draws
//! can be generated in any order or in parallel and still reproduce.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Random stream for draw number `index` under `master`.
pub fn stream(master: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}
