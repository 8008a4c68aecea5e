//! Stable 64-bit hashing for reproducible sampling and RNG substreams.
//!
//! Verdicts and simulations must be reproducible across machines and
//! process restarts, so nothing here may depend on `std`'s randomized
//! hasher. We use FNV-1a with the standard 64-bit offset basis and prime.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over a byte slice.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Folds extra bytes into an existing hash value.
pub fn fnv1a_extend(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Maps a string to the unit interval `[0, 1)` using the top 53 bits of
/// its FNV-1a hash, so the result is an exactly representable f64.
pub fn unit_from_id(id: &str) -> f64 {
    (fnv1a(id.as_bytes()) >> 11) as f64 / (1u64 << 53) as f64
}

/// Derives an independent RNG substream from a base seed and a label.
///
/// Substreams keyed by stable labels (device ids, stage ids, clip ids)
/// make simulation outputs independent of event-processing order.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    let h = fnv1a_extend(fnv1a(&seed.to_le_bytes()), label.as_bytes());
    ChaCha8Rng::seed_from_u64(h)
}
