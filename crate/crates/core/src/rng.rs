//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`ChaCha20Rng`] seeded from a
//! `u64` with `seed_from_u64`. Gaussian variates use the Ziggurat sampler of
//! `rand_distr::StandardNormal` in `f64` and are then cast to the working
//! scalar, so `f32` and `f64` runs consume identical streams.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::{Complex, Real};

pub type Rng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream label (SplitMix64 finalizer), so that
/// independent purposes inside one trial never share a stream.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn standard_normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Complex variate with independent standard normal real and imaginary parts.
pub fn complex_normal<T: Real>(rng: &mut Rng) -> Complex<T> {
    let re = standard_normal(rng);
    let im = standard_normal(rng);
    Complex::new(T::lit(re), T::lit(im))
}
