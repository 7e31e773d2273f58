//! Monte Carlo harnesses: strong error ladders and moment exponents.
//!
//! Paths are independent and run on a rayon pool; each path derives its
//! Brownian grid from `(master_seed, path_index)` and the final reductions
//! walk paths in ascending index order, so reports are bit-identical for
//! any worker count.

use rayon::prelude::*;

use crate::brownian::sample_grid;
use crate::error::{check_dim, Error, Result};
use crate::integrators::{ensure_commutative, integrate, Scheme, Stepper};
use crate::system::{norm, SdeSystem};
use crate::truncation::TruncationPolicy;

/// Default Monte Carlo sizes.
pub const DEFAULT_CONVERGENCE_PATHS: usize = 1000;
pub const DEFAULT_STABILITY_PATHS: usize = 2000;

/// Paths folded per parallel batch in the stability harness.
const STABILITY_BATCH: usize = 256;

/// What the coarse runs are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// The same scheme run at `delta_ref`.
    Numerical,
    /// The system's closed-form solution at `T`.
    Exact,
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub system: SdeSystem,
    pub policy: TruncationPolicy,
    pub scheme: Scheme,
    pub x0: Vec<f64>,
    /// Error moment `q`.
    pub q: f64,
    pub horizon: f64,
    pub delta_ref: f64,
    pub deltas: Vec<f64>,
    pub n_paths: usize,
    pub master_seed: u64,
    pub reference: Reference,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// Straight line through `(log₂ Δ, log₂ ê)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongErrorReport {
    pub deltas: Vec<f64>,
    /// `ê(Δ) = (mean |Y_ref(T) − Y_Δ(T)|^q)^{1/q}` over surviving paths.
    pub errors: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub n_diverged: Vec<usize>,
    pub n_paths: usize,
    pub q: f64,
    /// `None` with fewer than two steps or a zero error.
    pub fit: Option<OrderFit>,
}

fn run_in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(0) => Err(Error::InvalidInput("worker count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Number of `step`-sized steps in `span`, if it is a whole number.
fn whole_steps(span: f64, step: f64) -> Option<usize> {
    let ratio = span / step;
    let n = ratio.round();
    ((ratio - n).abs() <= 1e-9 * n.max(1.0) && n >= 1.0).then_some(n as usize)
}

impl ConvergenceConfig {
    fn validate(&self) -> Result<(usize, Vec<usize>)> {
        check_dim(self.system.dim(), self.x0.len())?;
        if !(self.q > 0.0) {
            return Err(Error::InvalidInput(format!("error moment q must be positive, got {}", self.q)));
        }
        if self.n_paths == 0 || self.deltas.is_empty() {
            return Err(Error::InvalidInput("need at least one path and one step size".into()));
        }
        if !(self.horizon > 0.0 && self.delta_ref > 0.0) {
            return Err(Error::InvalidInput("horizon and delta_ref must be positive".into()));
        }
        let n_ref = whole_steps(self.horizon, self.delta_ref).ok_or_else(|| {
            Error::InvalidInput(format!("T = {} is not a multiple of delta_ref = {}", self.horizon, self.delta_ref))
        })?;
        let factors = self
            .deltas
            .iter()
            .map(|&d| {
                whole_steps(d, self.delta_ref)
                    .filter(|f| n_ref % f == 0)
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "delta = {d} must be a multiple of delta_ref dividing T"
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        if self.reference == Reference::Exact && !self.system.has_exact_solution() {
            return Err(Error::InvalidInput(format!(
                "system '{}' has no exact solution",
                self.system.label()
            )));
        }
        Ok((n_ref, factors))
    }
}

/// Per-path `|Y_ref(T) − Y_Δ(T)|^q` for every ladder step; `None` marks a
/// divergence that excludes the path at that step.
fn path_errors(
    cfg: &ConvergenceConfig,
    path: u64,
    n_ref: usize,
    factors: &[usize],
    radii: &[f64],
    ref_radius: f64,
) -> Result<Vec<Option<f64>>> {
    let sys = &cfg.system;
    let grid = sample_grid(cfg.master_seed, path, sys.noise_dim(), n_ref, cfg.delta_ref)?;
    let reference = match cfg.reference {
        Reference::Exact => {
            let b_t = grid.fine().column_totals();
            sys.exact_solution(&cfg.x0, cfg.horizon, &b_t)
        }
        Reference::Numerical => {
            let mut stepper = Stepper::new(sys, ref_radius, cfg.delta_ref);
            integrate(&mut stepper, cfg.scheme, &cfg.x0, grid.fine(), |_, _| {}).ok()
        }
    };
    let Some(reference) = reference else {
        return Ok(vec![None; factors.len()]);
    };
    factors
        .iter()
        .zip(radii)
        .map(|(&factor, &radius)| {
            let coarse = grid.aggregate(factor)?;
            debug_assert!(coarse
                .column_totals()
                .iter()
                .zip(grid.fine().column_totals())
                .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs())));
            let mut stepper = Stepper::new(sys, radius, coarse.delta());
            Ok(integrate(&mut stepper, cfg.scheme, &cfg.x0, &coarse, |_, _| {})
                .ok()
                .map(|y| {
                    let diff: Vec<f64> = y.iter().zip(&reference).map(|(a, b)| a - b).collect();
                    norm(&diff).powf(cfg.q)
                }))
        })
        .collect()
}

fn scheme_radius(cfg: &ConvergenceConfig, delta: f64) -> Result<f64> {
    match cfg.scheme {
        Scheme::Mtm => cfg.policy.radius(delta),
        Scheme::Milstein => Ok(f64::INFINITY),
    }
}

/// Coupled strong-error ladder: every step size on a path is driven by
/// aggregates of one fine grid at `delta_ref`.
pub fn strong_error(cfg: &ConvergenceConfig) -> Result<StrongErrorReport> {
    let (n_ref, factors) = cfg.validate()?;
    ensure_commutative(&cfg.system)?;
    let radii = cfg
        .deltas
        .iter()
        .map(|&d| scheme_radius(cfg, d))
        .collect::<Result<Vec<_>>>()?;
    let ref_radius = match cfg.reference {
        Reference::Numerical => scheme_radius(cfg, cfg.delta_ref)?,
        Reference::Exact => f64::INFINITY,
    };

    let per_path: Vec<Vec<Option<f64>>> = run_in_pool(cfg.workers, || {
        (0..cfg.n_paths as u64)
            .into_par_iter()
            .map(|path| path_errors(cfg, path, n_ref, &factors, &radii, ref_radius))
            .collect::<Result<Vec<_>>>()
    })??;

    let mut errors = Vec::with_capacity(cfg.deltas.len());
    let mut std_errors = Vec::with_capacity(cfg.deltas.len());
    let mut n_diverged = Vec::with_capacity(cfg.deltas.len());
    for (i, &delta) in cfg.deltas.iter().enumerate() {
        let (mut sum, mut sum_sq, mut count) = (0.0_f64, 0.0_f64, 0usize);
        for path in &per_path {
            if let Some(v) = path[i] {
                sum += v;
                sum_sq += v * v;
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::AllPathsDiverged { delta });
        }
        let n = count as f64;
        let mean = sum / n;
        let var = if count > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        let se_mean = (var / n).sqrt();
        let error = mean.powf(1.0 / cfg.q);
        // delta method for M^{1/q}
        let se = if mean > 0.0 { error / (cfg.q * mean) * se_mean } else { 0.0 };
        errors.push(error);
        std_errors.push(se);
        n_diverged.push(cfg.n_paths - count);
    }

    let mut report = StrongErrorReport {
        deltas: cfg.deltas.clone(),
        errors,
        std_errors,
        n_diverged,
        n_paths: cfg.n_paths,
        q: cfg.q,
        fit: None,
    };
    report.fit = fit_order(&report).ok();
    Ok(report)
}

/// Least squares on `(log₂ Δ, log₂ ê(Δ))`.
pub fn fit_order(report: &StrongErrorReport) -> Result<OrderFit> {
    fit_log2_line(&report.deltas, &report.errors)
}

pub fn fit_log2_line(xs: &[f64], ys: &[f64]) -> Result<OrderFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit("need at least two (delta, error) pairs".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Fit("log of a non-positive or non-finite value".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.log2()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all step sizes coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(OrderFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Which quantity the moment is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// A single coordinate `Y^{(i)}` (zero-based).
    Coordinate(usize),
    /// The Euclidean norm `|Y|`.
    Norm,
}

#[derive(Debug, Clone)]
pub struct StabilityConfig {
    pub system: SdeSystem,
    pub policy: TruncationPolicy,
    pub scheme: Scheme,
    pub x0: Vec<f64>,
    /// Moment order.
    pub p: f64,
    pub delta: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub master_seed: u64,
    pub component: Component,
    /// Record every `sample_every`-th step (the final step is always kept).
    pub sample_every: usize,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub p: f64,
    pub delta: f64,
    pub ks: Vec<usize>,
    /// `log(mean |Y_k|^p)`; `None` where every path sat exactly at zero.
    pub log_moments: Vec<Option<f64>>,
    /// `log_moment / (kΔ)`.
    pub exponents: Vec<Option<f64>>,
    /// Average exponent over samples with `k ≥ ¾ k_max`.
    pub tail_exponent: Option<f64>,
    pub n_diverged: usize,
    pub n_paths: usize,
}

impl StabilityReport {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.ks.iter().map(move |&k| k as f64 * self.delta)
    }
}

/// Streaming `log(Σ e^{v_i})` that never leaves the log domain.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.scaled += (v - self.max).exp();
        }
    }

    /// `log Σ e^{v_i}`, or `None` if only `-∞` was pushed.
    pub fn log_sum(&self) -> Option<f64> {
        (self.max > f64::NEG_INFINITY).then(|| self.max + self.scaled.ln())
    }
}

fn sample_steps(n_steps: usize, every: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (1..=n_steps / every).map(|i| i * every).collect();
    if ks.last() != Some(&n_steps) {
        ks.push(n_steps);
    }
    ks
}

fn moment_logs(cfg: &StabilityConfig, path: u64, ks: &[usize], radius: f64) -> Result<Option<Vec<f64>>> {
    let grid = sample_grid(cfg.master_seed, path, cfg.system.noise_dim(), cfg.n_steps, cfg.delta)?;
    let mut stepper = Stepper::new(&cfg.system, radius, cfg.delta);
    let mut out = Vec::with_capacity(ks.len());
    let mut next = 0;
    let run = integrate(&mut stepper, cfg.scheme, &cfg.x0, grid.fine(), |k, y| {
        if next < ks.len() && ks[next] == k {
            let magnitude = match cfg.component {
                Component::Coordinate(i) => y[i].abs(),
                Component::Norm => norm(y),
            };
            out.push(cfg.p * magnitude.ln());
            next += 1;
        }
    });
    Ok(run.ok().map(|_| out))
}

/// Estimates `log E|Y_k|^p / (kΔ)` along the trajectory.
pub fn moment_exponent(cfg: &StabilityConfig) -> Result<StabilityReport> {
    check_dim(cfg.system.dim(), cfg.x0.len())?;
    if !(cfg.p > 0.0) {
        return Err(Error::InvalidInput(format!("moment order must be positive, got {}", cfg.p)));
    }
    if cfg.n_steps == 0 || cfg.n_paths == 0 || cfg.sample_every == 0 {
        return Err(Error::InvalidInput("n_steps, n_paths and sample_every must be positive".into()));
    }
    if let Component::Coordinate(i) = cfg.component {
        if i >= cfg.system.dim() {
            return Err(Error::IndexOutOfRange { index: i, limit: cfg.system.dim() });
        }
    }
    if !(cfg.delta > 0.0 && cfg.delta.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {}", cfg.delta)));
    }
    ensure_commutative(&cfg.system)?;
    let radius = match cfg.scheme {
        Scheme::Mtm => cfg.policy.radius(cfg.delta)?,
        Scheme::Milstein => f64::INFINITY,
    };
    let ks = sample_steps(cfg.n_steps, cfg.sample_every);

    let mut acc = vec![LogSumExp::default(); ks.len()];
    let mut survivors = 0usize;
    let n_paths = cfg.n_paths as u64;
    let mut start = 0u64;
    while start < n_paths {
        let end = (start + STABILITY_BATCH as u64).min(n_paths);
        let batch = run_in_pool(cfg.workers, || {
            (start..end)
                .into_par_iter()
                .map(|path| moment_logs(cfg, path, &ks, radius))
                .collect::<Result<Vec<_>>>()
        })??;
        for logs in batch.into_iter().flatten() {
            survivors += 1;
            for (a, v) in acc.iter_mut().zip(logs) {
                a.push(v);
            }
        }
        start = end;
    }
    if survivors == 0 {
        return Err(Error::AllPathsDiverged { delta: cfg.delta });
    }

    let log_n = (survivors as f64).ln();
    let log_moments: Vec<Option<f64>> = acc.iter().map(|a| a.log_sum().map(|s| s - log_n)).collect();
    let exponents: Vec<Option<f64>> = log_moments
        .iter()
        .zip(&ks)
        .map(|(lm, &k)| lm.map(|v| v / (k as f64 * cfg.delta)))
        .collect();
    let k_max = *ks.last().expect("at least one sample");
    let tail: Vec<f64> = ks
        .iter()
        .zip(&exponents)
        .filter(|(&k, _)| 4 * k >= 3 * k_max)
        .filter_map(|(_, e)| *e)
        .collect();
    let tail_exponent = (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64);

    Ok(StabilityReport {
        p: cfg.p,
        delta: cfg.delta,
        ks,
        log_moments,
        exponents,
        tail_exponent,
        n_diverged: cfg.n_paths - survivors,
        n_paths: cfg.n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    fn decay(noise: f64) -> SdeSystem {
        SdeSystem::new(
            "decay",
            1,
            1,
            |x, out| out[0] = -x[0],
            move |_, out| out[0] = noise,
            |_, _, _, out| out[0] = 0.0,
        )
        .unwrap()
    }

    fn wide() -> TruncationPolicy {
        TruncationPolicy::new("wide", |_| Ok(1e6), 1.0).unwrap()
    }

    fn report_with(deltas: Vec<f64>, errors: Vec<f64>) -> StrongErrorReport {
        let n = deltas.len();
        StrongErrorReport {
            deltas,
            errors,
            std_errors: vec![0.0; n],
            n_diverged: vec![0; n],
            n_paths: 1,
            q: 2.0,
            fit: None,
        }
    }

    #[test]
    fn fit_order_examples() {
        let deltas: Vec<f64> = (8..=10).map(|k| 2f64.powi(-k)).collect();
        let fit = fit_order(&report_with(deltas.clone(), deltas.iter().map(|d| 3.0 * d).collect())).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.log2()).abs() < 1e-12);
        let fit = fit_order(&report_with(deltas.clone(), vec![0.2; 3])).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        let fit = fit_order(&report_with(deltas.clone(), deltas.iter().map(|d| d * d).collect())).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(matches!(
            fit_order(&report_with(deltas.clone(), vec![0.1, 0.0, 0.2])),
            Err(Error::Fit(_))
        ));
        assert!(fit_order(&report_with(vec![0.1], vec![0.1])).is_err());
    }

    #[test]
    fn log_sum_exp_survives_underflow() {
        let mut acc = LogSumExp::default();
        for _ in 0..4 {
            acc.push(7.0 * -500.0);
        }
        let expected = -3500.0 + 4f64.ln();
        assert!((acc.log_sum().unwrap() - expected).abs() < 1e-9);

        let mut acc = LogSumExp::default();
        acc.push(f64::NEG_INFINITY);
        assert_eq!(acc.log_sum(), None);
        acc.push(-1.0);
        acc.push(2.0);
        acc.push(f64::NEG_INFINITY);
        assert!((acc.log_sum().unwrap() - ((-1f64).exp() + 2f64.exp()).ln()).abs() < 1e-14);
    }

    fn convergence_cfg(system: SdeSystem) -> ConvergenceConfig {
        ConvergenceConfig {
            system,
            policy: wide(),
            scheme: Scheme::Mtm,
            x0: vec![1.0],
            q: 2.0,
            horizon: 1.0,
            delta_ref: 2f64.powi(-12),
            deltas: (6..=9).rev().map(|k| 2f64.powi(-k)).collect(),
            n_paths: 4,
            master_seed: 1,
            reference: Reference::Numerical,
            workers: None,
        }
    }

    #[test]
    fn zero_noise_errors_match_closed_form() {
        let cfg = convergence_cfg(decay(0.0));
        let report = strong_error(&cfg).unwrap();
        for (d, e) in report.deltas.iter().zip(&report.errors) {
            let n = (1.0 / d).round() as i32;
            let exact_gap = ((1.0 - d).powi(n) - (1.0 - cfg.delta_ref).powi(1 << 12)).abs();
            // both terminal values are near e^-1, so the gap carries absolute rounding
            assert!((e - exact_gap).abs() < 1e-12, "{d}: {e} vs {exact_gap}");
        }
        let fit = report.fit.unwrap();
        // gap ∝ Δ − δ_ref, so the chord slope over 2^-9..2^-6 is log2(63/7)/3
        let expected = (63f64 / 7.0).log2() / 3.0;
        assert!((fit.slope - expected).abs() < 0.01, "slope {}", fit.slope);
        assert!(report.n_diverged.iter().all(|&n| n == 0));
        assert!(report.std_errors.iter().all(|&s| s.abs() < 1e-12));
    }

    #[test]
    fn config_validation() {
        let mut cfg = convergence_cfg(decay(0.0));
        cfg.deltas = vec![3.0 * cfg.delta_ref];
        assert!(strong_error(&cfg).is_err());
        let mut cfg = convergence_cfg(decay(0.0));
        cfg.horizon = 1.0 + 1e-5;
        assert!(strong_error(&cfg).is_err());
        let mut cfg = convergence_cfg(decay(0.0));
        cfg.reference = Reference::Exact;
        assert!(strong_error(&cfg).is_err());
        let mut cfg = convergence_cfg(decay(0.0));
        cfg.q = 0.0;
        assert!(strong_error(&cfg).is_err());
        let mut cfg = convergence_cfg(decay(0.0));
        cfg.workers = Some(0);
        assert!(strong_error(&cfg).is_err());
    }

    #[test]
    fn all_diverged_names_the_step() {
        let blowup = SdeSystem::new(
            "blowup",
            1,
            1,
            |x, out| out[0] = x[0].powi(5),
            |_, out| out[0] = 0.0,
            |_, _, _, out| out[0] = 0.0,
        )
        .unwrap();
        let mut cfg = convergence_cfg(blowup);
        cfg.scheme = Scheme::Milstein;
        cfg.x0 = vec![3.0];
        cfg.delta_ref = 2f64.powi(-4);
        cfg.deltas = vec![0.5];
        let err = strong_error(&cfg).unwrap_err();
        assert!(matches!(err, Error::AllPathsDiverged { .. }));
    }

    #[test]
    fn strong_error_independent_of_worker_count() {
        let mut cfg = convergence_cfg(registry::example2());
        cfg.policy = registry::example2_policy().unwrap();
        cfg.x0 = vec![1.0, 1.0];
        cfg.n_paths = 24;
        cfg.workers = Some(1);
        let a = strong_error(&cfg).unwrap();
        cfg.workers = Some(3);
        let b = strong_error(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.errors.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn deterministic_decay_exponent() {
        let delta = 2f64.powi(-10);
        let cfg = StabilityConfig {
            system: decay(0.0),
            policy: wide(),
            scheme: Scheme::Mtm,
            x0: vec![1.0],
            p: 2.0,
            delta,
            n_steps: 2048,
            n_paths: 3,
            master_seed: 0,
            component: Component::Coordinate(0),
            sample_every: 64,
            workers: None,
        };
        let report = moment_exponent(&cfg).unwrap();
        let target = 2.0 * (1.0 - delta).ln() / delta;
        assert_eq!(report.ks[0], 64);
        assert_eq!(*report.ks.last().unwrap(), 2048);
        for e in &report.exponents {
            assert!((e.unwrap() - target).abs() < 1e-9);
        }
        assert!((report.tail_exponent.unwrap() - target).abs() < 1e-9);
        assert!((target + 2.001).abs() < 1e-3);
    }

    #[test]
    fn zero_state_entries_are_flagged() {
        // x0 = 0 with f(0) = g(0) = 0 stays exactly at the origin
        let cfg = StabilityConfig {
            system: decay(0.0),
            policy: wide(),
            scheme: Scheme::Mtm,
            x0: vec![0.0],
            p: 7.0,
            delta: 0.01,
            n_steps: 10,
            n_paths: 5,
            master_seed: 0,
            component: Component::Norm,
            sample_every: 1,
            workers: None,
        };
        let report = moment_exponent(&cfg).unwrap();
        assert!(report.log_moments.iter().all(Option::is_none));
        assert!(report.exponents.iter().all(Option::is_none));
        assert_eq!(report.tail_exponent, None);
    }

    #[test]
    fn sample_steps_cover_final_step() {
        assert_eq!(sample_steps(10, 4), vec![4, 8, 10]);
        assert_eq!(sample_steps(8, 4), vec![4, 8]);
        assert_eq!(sample_steps(3, 1), vec![1, 2, 3]);
    }
}
