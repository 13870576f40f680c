//! Seeded random streams.
//!
//! Everything random in the crate draws from ChaCha8 seeded by a `u64`.
//! Parallel workers get their own stream: worker `k` uses the same key and
//! stream number `k + 1`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{CVector, C64};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn worker_stream(seed: u64, worker: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker + 1);
    rng
}

pub fn gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Complex vector with independent N(0, sigma^2) real and imaginary parts.
pub fn gaussian_cvector(rng: &mut Rng, n: usize, sigma: f64) -> CVector {
    (0..n)
        .map(|_| C64::new(sigma * gaussian(rng), sigma * gaussian(rng)))
        .collect()
}

/// Real vector (zero imaginary parts) with N(0, sigma^2) entries.
pub fn gaussian_real_cvector(rng: &mut Rng, n: usize, sigma: f64) -> CVector {
    (0..n)
        .map(|_| C64::new(sigma * gaussian(rng), 0.0))
        .collect()
}

/// Uniformly distributed direction on the complex unit sphere.
pub fn unit_direction(rng: &mut Rng, n: usize) -> CVector {
    loop {
        let v = gaussian_cvector(rng, n, 1.0);
        let nrm = v.norm();
        if nrm > 1e-12 {
            return v.scale(1.0 / nrm);
        }
    }
}
