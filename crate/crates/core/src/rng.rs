//! Deterministic RNG streams. Every randomized routine takes a `u64` seed and
//! derives independent substreams from it, so results are reproducible across
//! runs, thread counts, and platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for `(seed, stream)`. Distinct streams are statistically independent,
/// which lets parallel trials use `stream = trial index` deterministically.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stable mixing of a label into a derived seed (for named substreams).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, folded into the seed.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    seed ^ h
}
