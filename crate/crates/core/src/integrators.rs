//! Modified truncated Milstein steps and trajectories.
//!
//! One step of the scheme, with truncated coefficients evaluated at `Y_k`:
//!
//! ```text
//! Y_{k+1} = Y_k + f̃Δ + Σ_j g̃_j ΔB^j
//!         + ½ Σ_{j1,j2} Σ_l g̃_{l,j1} G̃_{j2}^l ΔB^{j2} ΔB^{j1}
//!         − ½ Σ_j Σ_l g̃_{l,j} G̃_j^l Δ
//! ```
//!
//! Classical Milstein is the same update with `f`, `g` and `G` untouched.
//! The double sum is folded as `Σ_l w_l Σ_j G̃_j^l ΔB^j` with `w = g̃ ΔB`,
//! so every `G̃_j^l` is evaluated once per step.

use std::fmt;
use std::str::FromStr;

use crate::brownian::Increments;
use crate::error::{check_dim, Error, Result};
use crate::sampling;
use crate::system::{check_commutativity, SdeSystem};
use crate::truncation::{locate, TruncationPolicy};

/// Probe cloud and tolerance for the commutativity guard in [`simulate`].
const GUARD_PROBES: usize = 100;
const GUARD_HALF_WIDTH: f64 = 5.0;
const GUARD_TOL: f64 = 1e-8;
const GUARD_SEED: u64 = 0x6d74_6d5f_6775_6172;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Modified truncated Milstein.
    Mtm,
    /// Classical Milstein, no truncation.
    Milstein,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Mtm => "mtm",
            Scheme::Milstein => "milstein",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mtm" => Ok(Scheme::Mtm),
            "milstein" => Ok(Scheme::Milstein),
            other => Err(Error::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Reusable buffers for repeated steps on one system at one radius.
pub(crate) struct Stepper<'a> {
    sys: &'a SdeSystem,
    radius: f64,
    delta: f64,
    proj: Vec<f64>,
    drift: Vec<f64>,
    diffusion: Vec<f64>,
    noise: Vec<f64>,
    bracket: Vec<f64>,
    deriv: Vec<f64>,
}

impl<'a> Stepper<'a> {
    /// `radius = f64::INFINITY` gives classical Milstein.
    pub(crate) fn new(sys: &'a SdeSystem, radius: f64, delta: f64) -> Self {
        let d = sys.dim();
        let m = sys.noise_dim();
        Self {
            sys,
            radius,
            delta,
            proj: vec![0.0; d],
            drift: vec![0.0; d],
            diffusion: vec![0.0; d * m],
            noise: vec![0.0; d],
            bracket: vec![0.0; d],
            deriv: vec![0.0; d],
        }
    }

    pub(crate) fn for_scheme(
        sys: &'a SdeSystem,
        policy: &TruncationPolicy,
        scheme: Scheme,
        delta: f64,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("step must be positive, got {delta}")));
        }
        let radius = match scheme {
            Scheme::Mtm => policy.radius(delta)?,
            Scheme::Milstein => f64::INFINITY,
        };
        Ok(Self::new(sys, radius, delta))
    }

    /// Advances `y` in place by one step driven by `db`.
    pub(crate) fn step(&mut self, y: &mut [f64], db: &[f64]) {
        let d = self.sys.dim();
        let scale = locate(y, self.radius, &mut self.proj);

        self.sys.drift_into(&self.proj, &mut self.drift);
        self.sys.diffusion_into(&self.proj, &mut self.diffusion);
        if scale != 1.0 {
            self.drift.iter_mut().for_each(|v| *v *= scale);
            self.diffusion.iter_mut().for_each(|v| *v *= scale);
        }

        // w_l = Σ_j g̃_{l,j} ΔB^j
        self.noise.fill(0.0);
        for (j, &dbj) in db.iter().enumerate() {
            let col = &self.diffusion[j * d..(j + 1) * d];
            for (w, g) in self.noise.iter_mut().zip(col) {
                *w += g * dbj;
            }
        }

        // Σ_l Σ_j ½ (w_l ΔB^j − Δ g̃_{l,j}) G̃_j^l
        self.bracket.fill(0.0);
        for (l, &w) in self.noise.iter().enumerate() {
            for (j, &dbj) in db.iter().enumerate() {
                let coef = 0.5 * (w * dbj - self.delta * self.diffusion[j * d + l]);
                if coef == 0.0 {
                    continue;
                }
                self.sys.derivative_into(&self.proj, j, l, &mut self.deriv);
                for (b, g) in self.bracket.iter_mut().zip(&self.deriv) {
                    *b += coef * g;
                }
            }
        }

        for (i, yi) in y.iter_mut().enumerate() {
            *yi = *yi + self.drift[i] * self.delta + self.noise[i] + self.bracket[i];
        }
    }
}

fn check_step_inputs(sys: &SdeSystem, y: &[f64], db: &[f64]) -> Result<()> {
    check_dim(sys.dim(), y.len())?;
    check_dim(sys.noise_dim(), db.len())?;
    Ok(())
}

/// One modified truncated Milstein step.
pub fn mtm_step(
    sys: &SdeSystem,
    policy: &TruncationPolicy,
    delta: f64,
    y: &[f64],
    db: &[f64],
) -> Result<Vec<f64>> {
    check_step_inputs(sys, y, db)?;
    let mut stepper = Stepper::for_scheme(sys, policy, Scheme::Mtm, delta)?;
    let mut next = y.to_vec();
    stepper.step(&mut next, db);
    Ok(next)
}

/// One classical Milstein step.
pub fn milstein_step(sys: &SdeSystem, delta: f64, y: &[f64], db: &[f64]) -> Result<Vec<f64>> {
    check_step_inputs(sys, y, db)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {delta}")));
    }
    let mut stepper = Stepper::new(sys, f64::INFINITY, delta);
    let mut next = y.to_vec();
    stepper.step(&mut next, db);
    Ok(next)
}

/// Iterates of one scheme on the uniform grid `0, Δ, …, NΔ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub delta: f64,
    pub scheme: Scheme,
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }
}

/// Refuses systems whose brackets disagree on the guard probe cloud.
pub fn ensure_commutative(sys: &SdeSystem) -> Result<()> {
    if sys.noise_dim() == 1 {
        return Ok(());
    }
    let probes = sampling::uniform_box(GUARD_PROBES, sys.dim(), GUARD_HALF_WIDTH, GUARD_SEED);
    let report = check_commutativity(sys, &probes, GUARD_TOL)?;
    if report.passed {
        Ok(())
    } else {
        Err(Error::NonCommutative {
            label: sys.label().to_string(),
            gap: report.worst_margin + GUARD_TOL,
            point: report.worst_point,
        })
    }
}

fn check_increments(sys: &SdeSystem, delta: f64, increments: &Increments) -> Result<()> {
    check_dim(sys.noise_dim(), increments.noise_dim())?;
    if (increments.delta() - delta).abs() > 1e-12 * delta {
        return Err(Error::InvalidInput(format!(
            "increments are over steps of {}, expected {delta}",
            increments.delta()
        )));
    }
    Ok(())
}

/// Runs the scheme from `x0`, one step per increment row, calling `visit`
/// with `(k, Y_k)` for `k = 0..=N`. Aborts on the first non-finite iterate.
pub(crate) fn integrate<F>(
    stepper: &mut Stepper<'_>,
    scheme: Scheme,
    x0: &[f64],
    increments: &Increments,
    mut visit: F,
) -> Result<Vec<f64>>
where
    F: FnMut(usize, &[f64]),
{
    let mut y = x0.to_vec();
    visit(0, &y);
    for k in 0..increments.rows() {
        stepper.step(&mut y, increments.row(k));
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged {
                scheme: scheme.label(),
                step: k + 1,
            });
        }
        visit(k + 1, &y);
    }
    Ok(y)
}

/// Full trajectory of `scheme` driven by `increments` (one row per step).
pub fn simulate(
    sys: &SdeSystem,
    policy: &TruncationPolicy,
    scheme: Scheme,
    delta: f64,
    x0: &[f64],
    increments: &Increments,
) -> Result<Trajectory> {
    check_dim(sys.dim(), x0.len())?;
    check_increments(sys, delta, increments)?;
    ensure_commutative(sys)?;
    let mut stepper = Stepper::for_scheme(sys, policy, scheme, delta)?;
    let n = increments.rows();
    let mut states = Vec::with_capacity((n + 1) * sys.dim());
    integrate(&mut stepper, scheme, x0, increments, |_, y| states.extend_from_slice(y))?;
    Ok(Trajectory {
        delta,
        scheme,
        dim: sys.dim(),
        times: (0..=n).map(|k| k as f64 * delta).collect(),
        states,
    })
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)] // cross-checks spell out the index sums
mod tests {
    use super::*;
    use crate::brownian::sample_grid;
    use crate::registry;

    fn decay() -> SdeSystem {
        SdeSystem::new(
            "decay",
            1,
            1,
            |x, out| out[0] = -x[0],
            |_, out| out[0] = 0.0,
            |_, _, _, out| out[0] = 0.0,
        )
        .unwrap()
    }

    fn additive() -> SdeSystem {
        SdeSystem::new(
            "additive",
            2,
            2,
            |x, out| {
                out[0] = -x[0] * x[0] * x[0];
                out[1] = x[0] - x[1];
            },
            |_, out| out.copy_from_slice(&[0.5, 0.1, -0.2, 0.3]),
            |_, _, _, out| out.fill(0.0),
        )
        .unwrap()
    }

    fn wide() -> TruncationPolicy {
        TruncationPolicy::new("wide", |_| Ok(1e6), 1.0).unwrap()
    }

    #[test]
    fn gbm_step_by_hand() {
        let sys = registry::gbm(0.0, 1.0);
        let y = mtm_step(&sys, &wide(), 0.01, &[1.0], &[0.1]).unwrap();
        assert!((y[0] - 1.1).abs() < 1e-15);
        let y = milstein_step(&sys, 0.01, &[1.0], &[0.1]).unwrap();
        assert!((y[0] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn zero_diffusion_is_euler_drift() {
        let y = mtm_step(&decay(), &wide(), 0.5, &[2.0], &[0.37]).unwrap();
        assert_eq!(y, vec![1.0]);
    }

    #[test]
    fn constant_diffusion_reduces_to_euler_maruyama() {
        let sys = additive();
        let y = [0.7, -1.2];
        let db = [0.05, -0.11];
        let delta = 0.01;
        let got = mtm_step(&sys, &wide(), delta, &y, &db).unwrap();
        let f = sys.eval_drift(&y).unwrap();
        let g = sys.eval_diffusion(&y).unwrap();
        for i in 0..2 {
            let w = g.get(i, 0) * db[0] + g.get(i, 1) * db[1];
            assert_eq!(got[i], y[i] + f[i] * delta + w);
        }
    }

    #[test]
    fn example2_milstein_brackets_by_hand() {
        let sys = registry::example2();
        let delta = 2f64.powi(-4);
        let y = milstein_step(&sys, delta, &[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(y, vec![1.0 - 2f64.powi(-3), 1.0 + 2f64.powi(-5)]);
    }

    #[test]
    fn milstein_equals_mtm_inside_ball() {
        let sys = registry::example2();
        let policy = registry::example2_policy().unwrap();
        let delta = 2f64.powi(-6);
        for (y, db) in [([1.0, 1.0], [0.1, -0.05]), ([-2.0, 0.5], [0.0, 0.3]), ([0.0, 0.0], [0.2, 0.2])] {
            assert_eq!(
                mtm_step(&sys, &policy, delta, &y, &db).unwrap(),
                milstein_step(&sys, delta, &y, &db).unwrap()
            );
        }
    }

    #[test]
    fn step_matches_literal_double_sum() {
        // Independent route: assemble the printed formula from the
        // truncated-coefficient operations term by term.
        use crate::truncation::{truncated_diffusion, truncated_drift, truncated_levy_term};
        let sys = registry::example2();
        let policy = TruncationPolicy::new("tight", |_| Ok(1.3), 1.0).unwrap();
        let delta = 0.01;
        for (y, db) in [([1.0, 1.0], [0.1, -0.05]), ([3.0, -4.0], [-0.2, 0.07])] {
            let f = truncated_drift(&sys, &policy, delta, &y).unwrap();
            let g = truncated_diffusion(&sys, &policy, delta, &y).unwrap();
            let mut expected = [0.0; 2];
            for i in 0..2 {
                expected[i] = y[i] + f[i] * delta;
                for j in 0..2 {
                    expected[i] += g.get(i, j) * db[j];
                }
            }
            for j1 in 0..2 {
                for j2 in 0..2 {
                    let bracket = truncated_levy_term(&sys, &policy, delta, &y, j1, j2).unwrap();
                    for i in 0..2 {
                        expected[i] += 0.5 * bracket[i] * db[j2] * db[j1];
                    }
                }
                let diag = truncated_levy_term(&sys, &policy, delta, &y, j1, j1).unwrap();
                for i in 0..2 {
                    expected[i] -= 0.5 * diag[i] * delta;
                }
            }
            let got = mtm_step(&sys, &policy, delta, &y, &db).unwrap();
            for i in 0..2 {
                assert!((got[i] - expected[i]).abs() <= 1e-13 * (1.0 + expected[i].abs()));
            }
        }
    }

    #[test]
    fn step_input_errors() {
        let sys = registry::example2();
        assert!(mtm_step(&sys, &wide(), 0.1, &[1.0], &[0.0, 0.0]).is_err());
        assert!(mtm_step(&sys, &wide(), 0.1, &[1.0, 1.0], &[0.0]).is_err());
        assert!(matches!(
            mtm_step(&sys, &wide(), 2.0, &[1.0, 1.0], &[0.0, 0.0]),
            Err(Error::DeltaOutOfRange { .. })
        ));
        assert!(milstein_step(&sys, -0.1, &[1.0, 1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn deterministic_decay_trajectory() {
        let delta = 2f64.powi(-10);
        let inc = Increments::new(1, delta, vec![0.0; 1024]).unwrap();
        let traj = simulate(&decay(), &wide(), Scheme::Mtm, delta, &[1.0], &inc).unwrap();
        assert_eq!(traj.len(), 1025);
        let expected = (1.0 - delta).powi(1024);
        assert!((traj.final_state()[0] - expected).abs() < 1e-12);
        assert!((traj.final_state()[0] - (-1f64).exp()).abs() < 1e-3);
        assert_eq!(traj.times()[1024], 1.0);
    }

    #[test]
    fn empty_increments_give_initial_state() {
        let inc = Increments::new(1, 0.1, vec![]).unwrap();
        let traj = simulate(&decay(), &wide(), Scheme::Mtm, 0.1, &[3.0], &inc).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.state(0), &[3.0]);
    }

    #[test]
    fn simulate_is_deterministic() {
        let sys = registry::example2();
        let policy = registry::example2_policy().unwrap();
        let run = || {
            let grid = sample_grid(9, 4, 2, 1 << 10, 2f64.powi(-10)).unwrap();
            let inc = grid.aggregate(4).unwrap();
            simulate(&sys, &policy, Scheme::Mtm, 2f64.powi(-8), &[1.0, 1.0], &inc).unwrap()
        };
        let (a, b) = (run(), run());
        let bits = |t: &Trajectory| t.states().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn simulate_refuses_noncommutative_noise() {
        let sys = registry::noncommutative_witness();
        let inc = Increments::new(2, 0.1, vec![0.0; 20]).unwrap();
        let err = simulate(&sys, &wide(), Scheme::Mtm, 0.1, &[1.0, 1.0], &inc).unwrap_err();
        assert!(matches!(err, Error::NonCommutative { .. }));
    }

    #[test]
    fn simulate_rejects_mismatched_increments() {
        let inc = Increments::new(1, 0.2, vec![0.0; 4]).unwrap();
        assert!(simulate(&decay(), &wide(), Scheme::Mtm, 0.1, &[1.0], &inc).is_err());
    }

    #[test]
    fn explosion_reports_step() {
        let sys = SdeSystem::new(
            "blowup",
            1,
            1,
            |x, out| out[0] = x[0] * x[0] * x[0] * x[0],
            |_, out| out[0] = 0.0,
            |_, _, _, out| out[0] = 0.0,
        )
        .unwrap();
        let inc = Increments::new(1, 0.5, vec![0.0; 50]).unwrap();
        let err = simulate(&sys, &wide(), Scheme::Milstein, 0.5, &[10.0], &inc).unwrap_err();
        assert!(matches!(err, Error::Diverged { scheme: "milstein", step } if step > 1 && step < 50));
        // truncation keeps the same problem finite
        let policy = TruncationPolicy::new("h=2", |_| Ok(2.0), 1.0).unwrap();
        assert!(simulate(&sys, &policy, Scheme::Mtm, 0.5, &[-10.0], &inc).is_ok());
    }

    #[test]
    fn scheme_labels_round_trip() {
        for s in [Scheme::Mtm, Scheme::Milstein] {
            assert_eq!(s.label().parse::<Scheme>().unwrap(), s);
        }
        assert!("euler".parse::<Scheme>().is_err());
    }
}
