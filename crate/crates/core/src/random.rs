//! Seeded Gaussian sampling shared by the gallery and the noise model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::numerics::DenseMatrix;

/// Recorded in run metadata so stored results can be regenerated.
pub const GENERATOR: &str = "ChaCha20Rng(rand_chacha 0.9)+StandardNormal(rand_distr 0.5)";

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Column-major fill, so a given seed always yields the same matrix.
pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}
