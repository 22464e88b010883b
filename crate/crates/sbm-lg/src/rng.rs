//! Deterministic RNG plumbing.
//!
//! Every randomized operation takes a 64-bit seed and derives ChaCha8
//! substreams from it. Stream 0 is reserved for label sampling; the edge
//! sampler claims streams 1 and up, one per work chunk. Results therefore
//! do not depend on thread count or execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream carrying the multinomial label draws.
pub(crate) const LABEL_STREAM: u64 = 0;
/// First stream available to the edge sampler.
pub(crate) const SAMPLER_STREAM_BASE: u64 = 1;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 step, used to derive independent per-replicate seeds.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a replicate seed from (master seed, node count, replicate index).
/// Independent of the order replicates are executed in.
pub fn replicate_seed(seed: u64, n: u64, replicate: u64) -> u64 {
    splitmix64(splitmix64(seed ^ n.wrapping_mul(0x9e37_79b9_7f4a_7c15)) ^ replicate)
}
