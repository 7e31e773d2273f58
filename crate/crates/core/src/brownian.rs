//! Reproducible Brownian increments with exact coupling across step sizes.
//!
//! Each path owns an independent ChaCha stream selected by
//! `(master_seed, path_index)`; the increment for fine step `i` and noise
//! component `j` consumes the `i·m + j`-th 64-bit word of that stream, so a
//! grid never depends on thread scheduling. Gaussians come from the
//! inverse normal CDF, one word per draw. Coarser grids are always
//! derived from the fine increments by block summation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// A row-major `rows × m` array of Brownian increments over steps of `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    noise_dim: usize,
    delta: f64,
    data: Vec<f64>,
}

impl Increments {
    pub fn new(noise_dim: usize, delta: f64, data: Vec<f64>) -> Result<Self> {
        if noise_dim == 0 || !data.len().is_multiple_of(noise_dim) {
            return Err(Error::InvalidInput(format!(
                "{} values do not form rows of width {noise_dim}",
                data.len()
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!("step must be positive, got {delta}")));
        }
        Ok(Self {
            noise_dim,
            delta,
            data,
        })
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.noise_dim
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.noise_dim..(k + 1) * self.noise_dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Sums consecutive blocks of `factor` rows, each in ascending order.
    pub fn aggregate(&self, factor: usize) -> Result<Increments> {
        let rows = self.rows();
        if factor == 0 || !rows.is_multiple_of(factor) {
            return Err(Error::InvalidInput(format!(
                "factor {factor} does not divide {rows} steps"
            )));
        }
        let m = self.noise_dim;
        let mut data = vec![0.0; rows / factor * m];
        for (k, out) in data.chunks_exact_mut(m).enumerate() {
            for i in k * factor..(k + 1) * factor {
                for (o, v) in out.iter_mut().zip(self.row(i)) {
                    *o += v;
                }
            }
        }
        Ok(Increments {
            noise_dim: m,
            delta: self.delta * factor as f64,
            data,
        })
    }

    /// Columnwise totals `B(T) − B(0)`, summed in ascending order.
    pub fn column_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.noise_dim];
        for row in self.data.chunks_exact(self.noise_dim) {
            for (t, v) in totals.iter_mut().zip(row) {
                *t += v;
            }
        }
        totals
    }
}

/// One Brownian path sampled at the finest resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianGrid {
    pub master_seed: u64,
    pub path_index: u64,
    increments: Increments,
}

impl BrownianGrid {
    pub fn noise_dim(&self) -> usize {
        self.increments.noise_dim
    }

    pub fn delta_fine(&self) -> f64 {
        self.increments.delta
    }

    pub fn n_fine(&self) -> usize {
        self.increments.rows()
    }

    pub fn fine(&self) -> &Increments {
        &self.increments
    }

    /// Increments over steps of `factor · delta_fine`.
    pub fn aggregate(&self, factor: usize) -> Result<Increments> {
        self.increments.aggregate(factor)
    }
}

/// Maps a 64-bit word to a uniform in the open interval `(0, 1)`.
fn open_unit(word: u64) -> f64 {
    ((word >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Inverse standard normal CDF.
pub fn standard_normal_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// Draws `n_fine × m` increments with variance `delta_fine`.
pub fn sample_grid(
    master_seed: u64,
    path_index: u64,
    noise_dim: usize,
    n_fine: usize,
    delta_fine: f64,
) -> Result<BrownianGrid> {
    if noise_dim == 0 || n_fine == 0 {
        return Err(Error::InvalidInput(
            "grid needs at least one step and one noise component".into(),
        ));
    }
    if !(delta_fine > 0.0 && delta_fine.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "fine step must be positive, got {delta_fine}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    let scale = delta_fine.sqrt();
    let data = (0..n_fine * noise_dim)
        .map(|_| scale * standard_normal_quantile(open_unit(rng.next_u64())))
        .collect();
    Ok(BrownianGrid {
        master_seed,
        path_index,
        increments: Increments {
            noise_dim,
            delta: delta_fine,
            data,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn same_key_same_grid() {
        let a = sample_grid(42, 7, 2, 1000, 0.01).unwrap();
        let b = sample_grid(42, 7, 2, 1000, 0.01).unwrap();
        assert_eq!(a, b);
        let bits = |g: &BrownianGrid| g.fine().as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn paths_are_separated() {
        let a = sample_grid(42, 0, 1, 100, 0.01).unwrap();
        let b = sample_grid(42, 1, 1, 100, 0.01).unwrap();
        assert_ne!(a.fine(), b.fine());
        let c = sample_grid(43, 0, 1, 100, 0.01).unwrap();
        assert_ne!(a.fine(), c.fine());
    }

    #[test]
    fn prefix_is_stable_under_longer_grids() {
        let short = sample_grid(5, 3, 2, 10, 1.0).unwrap();
        let long = sample_grid(5, 3, 2, 20, 1.0).unwrap();
        assert_eq!(short.fine().as_slice(), &long.fine().as_slice()[..20]);
    }

    #[test]
    fn fine_variance_matches_step() {
        let n = 1 << 15;
        let delta = 2f64.powi(-15);
        let grid = sample_grid(2024, 0, 2, n, delta).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = (0..n).map(|k| grid.fine().row(k)[j]).collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            // sd of the sample variance is delta * sqrt(2/n) ≈ 0.0078 delta
            assert!((var / delta - 1.0).abs() < 0.1, "variance ratio {}", var / delta);
            assert!(mean.abs() < 5.0 * (delta / n as f64).sqrt());
        }
    }

    #[test]
    fn quantile_symmetry_and_tails() {
        assert_eq!(standard_normal_quantile(0.5), 0.0);
        assert!((standard_normal_quantile(0.975) - 1.959963984540054).abs() < 1e-12);
        assert!((standard_normal_quantile(0.025) + 1.959963984540054).abs() < 1e-12);
        let smallest = standard_normal_quantile(open_unit(0));
        assert!(smallest.is_finite() && smallest < -8.0);
        assert!(standard_normal_quantile(open_unit(u64::MAX)).is_finite());
    }

    #[test]
    fn aggregate_examples() {
        let inc = Increments::new(1, 0.25, vec![0.1, -0.2, 0.3, 0.05]).unwrap();
        let two = inc.aggregate(2).unwrap();
        assert_eq!(two.as_slice(), &[0.1 + -0.2, 0.3 + 0.05]);
        assert!((two.as_slice()[0] + 0.1).abs() < 1e-16 && (two.as_slice()[1] - 0.35).abs() < 1e-16);
        assert_eq!(two.delta(), 0.5);
        assert_eq!(inc.aggregate(1).unwrap(), inc);
        let all = inc.aggregate(4).unwrap();
        assert_eq!(all.as_slice(), inc.column_totals().as_slice());
        assert!(matches!(inc.aggregate(3), Err(Error::InvalidInput(_))));
        assert!(inc.aggregate(0).is_err());
    }

    #[test]
    fn sample_grid_rejects_bad_sizes() {
        assert!(sample_grid(1, 0, 1, 0, 0.1).is_err());
        assert!(sample_grid(1, 0, 0, 10, 0.1).is_err());
        assert!(sample_grid(1, 0, 1, 10, 0.0).is_err());
    }

    #[test]
    fn dyadic_increments_telescope_exactly() {
        // Multiples of 2^-20 with small magnitude add without rounding.
        let data: Vec<f64> = (0..64).map(|i| ((i * 37 % 23) as f64 - 11.0) * 2f64.powi(-20)).collect();
        let inc = Increments::new(2, 1.0, data).unwrap();
        assert_eq!(inc.aggregate(4).unwrap(), inc.aggregate(2).unwrap().aggregate(2).unwrap());
        assert_eq!(inc.aggregate(8).unwrap().column_totals(), inc.column_totals());
    }

    proptest! {
        #[test]
        fn aggregation_telescopes(seed in any::<u64>(), path in 0u64..1000, log_n in 2u32..9) {
            let n = 1usize << log_n;
            let grid = sample_grid(seed, path, 2, n, 1.0 / n as f64).unwrap();
            let direct = grid.aggregate(4).unwrap();
            let nested = grid.aggregate(2).unwrap().aggregate(2).unwrap();
            for (a, b) in direct.as_slice().iter().zip(nested.as_slice()) {
                prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs() + 1.0));
            }
            let fine_total = grid.fine().column_totals();
            for factor in [1usize, 2, 4, n] {
                let total = grid.aggregate(factor).unwrap().column_totals();
                for (a, b) in total.iter().zip(&fine_total) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }
}
