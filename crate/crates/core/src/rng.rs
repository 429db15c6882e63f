//! Deterministic RNG stream derivation.
//!
//! Every randomized routine in this crate derives an independent ChaCha8
//! stream from a user seed plus a routine-specific tag (bootstrap iteration,
//! record id, generator concern). Mixing through splitmix64 keeps nearby
//! tags from producing correlated streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for (seed, tag); equal inputs yield equal streams, and any tag
/// change decorrelates the output completely.
pub(crate) fn sub_rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)))
}
