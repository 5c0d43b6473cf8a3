//! Per-episode random streams.
//!
//! Every episode derives independent ChaCha streams from its seed, one per
//! subsystem, so extra draws in one subsystem never shift another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Sampling = 1,
    Sparsify = 2,
    Noise = 3,
    Backoff = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
