//! Seeded, thread-count independent random streams.
//!
//! Draws are produced in fixed chunks; chunk c uses the ChaCha8 stream c of
//! the base seed, so the output depends only on (seed, n).

use crate::par;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CHUNK: usize = 4096;

/// SplitMix64 mix of a base seed with a tag; used to give independent
/// components of one run (truth, errors, replications) their own seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` draws of `f`, identical for every thread count.
pub fn draws<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let parts = par::map_range(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = CHUNK.min(n - c * CHUNK);
        (0..len).map(|_| f(&mut rng)).collect::<Vec<T>>()
    });
    parts.into_iter().flatten().collect()
}
