//! Seed fan-out: one user-facing seed drives every block's init and
//! shuffle stream. Blocks hash their pair key into the global seed, so
//! training stays reproducible regardless of execution order or thread
//! count, and no two blocks share a stream.

use pairnet_core::ensemble::PairKey;

/// Stream tag for parameter initialization.
pub const STREAM_INIT: u64 = 0;
/// Stream tag for per-epoch example shuffling.
pub const STREAM_SHUFFLE: u64 = 1;

/// SplitMix64 finalizer; a well-mixed 64-bit permutation step.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed for one stream of one block.
pub fn block_seed(global: u64, pair: PairKey, stream: u64) -> u64 {
    let mut s = splitmix64(global);
    s = splitmix64(s ^ pair.0 as u64);
    s = splitmix64(s ^ pair.1 as u64);
    splitmix64(s ^ stream)
}
