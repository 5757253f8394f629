use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::ComplexMatrix;

/// Explicit seed for every randomized routine. Identical seeds and call
/// sequences reproduce identical outputs on every platform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed for sub-task `index` (restart, level, trial).
    pub fn derive(self, index: u64) -> RngSeed {
        // splitmix64 finalizer over (seed, index)
        let mut z = self.0 ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Random `m×m` matrix of operator norm exactly `radius` (up to rounding):
/// a complex Gaussian draw rescaled onto the sphere.
pub fn sample_ball<T: Real>(m: usize, radius: T, seed: RngSeed) -> Result<ComplexMatrix<T>> {
    sample_ball_with(&mut seed.rng(), m, radius)
}

pub fn sample_ball_with<T: Real, R: Rng + ?Sized>(rng: &mut R, m: usize, radius: T) -> Result<ComplexMatrix<T>> {
    if !(radius > T::zero() && radius < T::one()) {
        return invalid(format!("sample radius must lie in (0,1), got {radius}"));
    }
    if m == 0 {
        return invalid("level must be positive");
    }
    loop {
        let g: ComplexMatrix<T> = gaussian_matrix(rng, m, m);
        let n = g.operator_norm_unchecked();
        if n > T::zero() {
            return Ok(g.scale_real(radius / n));
        }
    }
}
