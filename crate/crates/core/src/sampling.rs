//! Deterministic sample clouds for the assumption audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Default audit cloud size.
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Default audit ball radius.
pub const DEFAULT_RADIUS: f64 = 10.0;

/// `n` points uniform in the cube `[-half_width, half_width]^d`.
pub fn uniform_box(n: usize, dim: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| rng.random_range(-half_width..=half_width))
                .collect()
        })
        .collect()
}

/// `n` points uniform in the closed Euclidean ball of the given radius.
pub fn uniform_ball(n: usize, dim: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| ball_point(&mut rng, dim, radius)).collect()
}

fn ball_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let len = crate::system::norm(&dir);
        if len == 0.0 {
            continue;
        }
        let u: f64 = rng.random();
        let r = radius * u.powf(1.0 / dim as f64);
        return dir.into_iter().map(|v| v * r / len).collect();
    }
}
