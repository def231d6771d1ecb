//! Reproducible random streams keyed by `(seed, replica)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream generator used everywhere in the crate.
pub type Stream = ChaCha8Rng;

/// Independent stream for one replica: the ChaCha key comes from `seed`, the
/// stream id from `replica`, so replicas never share keystream blocks.
pub fn replica_stream(seed: u64, replica: u64) -> Stream {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(replica);
    r
}

/// Derives a sub-seed for a named purpose, so that distinct tasks run from
/// one user seed do not reuse streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `Exp(rate)` variate; infinite when the rate is zero.
#[inline]
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

/// Uniform variate in `[0, 1)`.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen()
}
