//! Counter-based random streams.
//!
//! Each replication of a Monte Carlo experiment owns one ChaCha8 stream,
//! selected by `(seed, stream)`. Streams are independent and can be
//! regenerated in any order, which is what makes parallel runs reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Opens stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for a two-level index such as (time index, sample index).
pub fn nested_stream(outer: u64, inner: u64) -> u64 {
    (outer << 32) | (inner & 0xffff_ffff)
}
