//! Seeded random streams.
//!
//! Every stochastic routine takes either an explicit `&mut impl Rng` or a
//! `u64` seed. Independent estimators derived from one master seed use
//! distinct ChaCha stream numbers, so their draws never overlap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic, platform-independent seed derivation from a list of parts.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x5EED_u64, |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Uniform draw on the open interval `(0, 1)`.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand::distr::Open01)
}

/// Standard Pareto draw, `P(Y > y) = y^-alpha` for `y >= 1`, by inverse transform.
pub fn pareto<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    open_unit(rng).powf(-1.0 / alpha)
}
