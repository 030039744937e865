use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::norm2;

/// Adds white Gaussian noise with relative norm exactly `level`:
/// `e = level·‖b‖₂·g/‖g‖₂`. Returns the noisy data and `‖e‖₂`.
pub fn add_noise(b_clean: &[f64], level: f64, seed: u64) -> (Vec<f64>, f64) {
    let bnorm = norm2(b_clean);
    if level <= 0.0 || bnorm == 0.0 || b_clean.is_empty() {
        return (b_clean.to_vec(), 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..b_clean.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let gnorm = norm2(&g);
    let noise_norm = level * bnorm;
    let factor = noise_norm / gnorm;
    let noisy = b_clean
        .iter()
        .zip(&g)
        .map(|(b, gi)| b + factor * gi)
        .collect();
    (noisy, noise_norm)
}
