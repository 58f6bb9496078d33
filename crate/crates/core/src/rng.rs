//! Seed-derived random substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by
//! `(seed, realization)` and positioned on stream `lane`. Results therefore do
//! not depend on evaluation order or on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn substream(seed: u64, realization: u64, lane: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&realization.to_le_bytes());
    key[16..24].copy_from_slice(b"uaswave\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(lane);
    rng
}
