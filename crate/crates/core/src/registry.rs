//! Built-in problems keyed by label.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::system::{norm, AssumptionParams, SdeSystem};
use crate::truncation::TruncationPolicy;

pub const LABELS: [&str; 6] = [
    "example1",
    "example2",
    "example3-paper",
    "example3-consistent",
    "gbm",
    "noncommutative-witness",
];

/// Tunable constants of the built-in problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuiltinParams {
    /// GBM drift rate.
    pub mu: f64,
    /// GBM volatility.
    pub sigma: f64,
    /// Exponent slack in example 1's inverse radius.
    pub epsilon: f64,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self {
            mu: 0.5,
            sigma: 1.0,
            epsilon: 0.5,
        }
    }
}

/// A system bundled with its initial value, default truncation policy and
/// the assumption constants it is claimed to satisfy.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: SdeSystem,
    pub x0: Vec<f64>,
    pub policy: TruncationPolicy,
    pub khasminskii: Option<AssumptionParams>,
    pub dissipativity: Option<AssumptionParams>,
}

pub fn lookup(label: &str, params: &BuiltinParams) -> Result<Problem> {
    let problem = match label {
        "example1" => Problem {
            system: example1(),
            x0: vec![1.0, 1.0],
            policy: example1_policy(params.epsilon)?,
            khasminskii: Some(AssumptionParams::khasminskii(5.0, 1.0)?),
            dissipativity: None,
        },
        "example2" => Problem {
            system: example2(),
            x0: vec![1.0, 1.0],
            policy: example2_policy()?,
            khasminskii: Some(AssumptionParams::khasminskii(7.0, 4.0)?),
            dissipativity: None,
        },
        "example3-paper" | "example3-consistent" => Problem {
            system: if label == "example3-paper" {
                example3_paper()
            } else {
                example3_consistent()
            },
            x0: vec![1.0, -1.0],
            policy: example3_policy(),
            khasminskii: None,
            dissipativity: Some(AssumptionParams::dissipative(7.0, 1.0)?),
        },
        "gbm" => Problem {
            system: gbm(params.mu, params.sigma),
            x0: vec![1.0],
            policy: TruncationPolicy::power(0.5)?,
            khasminskii: None,
            dissipativity: None,
        },
        "noncommutative-witness" => Problem {
            system: noncommutative_witness(),
            x0: vec![1.0, 1.0],
            policy: TruncationPolicy::power(0.5)?,
            khasminskii: None,
            dissipativity: None,
        },
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(problem)
}

/// Exponentially growing coefficients:
/// `f(x) = x − e^{|x|}(2x₁+x₂, −x₁+2x₂)`, `g(x) = e^{|x|/2} x`, scalar noise.
pub fn example1() -> SdeSystem {
    SdeSystem::new(
        "example1",
        2,
        1,
        |x, out| {
            let e = norm(x).exp();
            out[0] = x[0] - 2.0 * x[0] * e - x[1] * e;
            out[1] = x[1] + x[0] * e - 2.0 * x[1] * e;
        },
        |x, out| {
            let e = (0.5 * norm(x)).exp();
            out[0] = x[0] * e;
            out[1] = x[1] * e;
        },
        |x, _, l, out| {
            let r = norm(x);
            let e = (0.5 * r).exp();
            // ∂(e^{r/2} x)/∂x^l = e^{r/2} (e_l + x x_l / (2r))
            let radial = if r > 0.0 { x[l] / (2.0 * r) } else { 0.0 };
            for (i, o) in out.iter_mut().enumerate() {
                let unit = if i == l { 1.0 } else { 0.0 };
                *o = e * (unit + x[i] * radial);
            }
        },
    )
    .expect("valid dimensions")
}

/// `l(r) = 1 / (18^{5/2} r^{15/2+ε} e^{5r})`, evaluated in log space.
pub fn example1_l(epsilon: f64) -> impl Fn(f64) -> f64 + Send + Sync + Clone + 'static {
    let log18 = 18f64.ln();
    move |r: f64| (-(2.5 * log18 + (7.5 + epsilon) * r.ln() + 5.0 * r)).exp()
}

/// `h = l⁻¹` with `K_R = 3Re^R`, `K̄_R = 18R³e^{2R}`.
pub fn example1_policy(epsilon: f64) -> Result<TruncationPolicy> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!(
            "example 1 needs epsilon in (0, 1), got {epsilon}"
        )));
    }
    Ok(TruncationPolicy::inverse_of(
        format!("h = inverse of example1 l, epsilon = {epsilon}"),
        example1_l(epsilon),
        1.0,
    )?
    .with_k_plain(|r| 3.0 * r * r.exp())
    .with_k_bar(|r| 18.0 * r.powi(3) * (2.0 * r).exp()))
}

/// Polynomial coefficients with diagonal noise:
/// `f(x) = (1 − 3x₁³ + x₂, x₁)`, `g(x) = diag(x₁², x₂)`.
pub fn example2() -> SdeSystem {
    SdeSystem::new(
        "example2",
        2,
        2,
        |x, out| {
            out[0] = 1.0 - 3.0 * x[0] * x[0] * x[0] + x[1];
            out[1] = x[0];
        },
        |x, out| {
            out[0] = x[0] * x[0];
            out[1] = 0.0;
            out[2] = 0.0;
            out[3] = x[1];
        },
        |x, j, l, out| {
            out.fill(0.0);
            match (j, l) {
                (0, 0) => out[0] = 2.0 * x[0],
                (1, 1) => out[1] = 1.0,
                _ => {}
            }
        },
    )
    .expect("valid dimensions")
}

/// Default example 2 policy: `h(Δ) = Δ^{-1}`, which keeps the radius far
/// above the trajectory range on the convergence ladder.
pub fn example2_policy() -> Result<TruncationPolicy> {
    Ok(TruncationPolicy::power(1.0)?
        .with_k_plain(|r| 9.0 * r * r)
        .with_k_bar(|r| 81.0 * r.powi(5)))
}

/// `h(Δ) = Δ^{-2ε/25}`, the radius family with rate `1 − ε`.
pub fn example2_printed_policy(epsilon: f64) -> Result<TruncationPolicy> {
    Ok(TruncationPolicy::power(2.0 * epsilon / 25.0)?
        .with_k_plain(|r| 9.0 * r * r)
        .with_k_bar(|r| 81.0 * r.powi(5)))
}

fn example3_drift(x: &[f64], out: &mut [f64]) {
    out[0] = -x[0] - 2.0 * x[0] * x[0] * x[0] - x[1];
    out[1] = -x[1] + x[0] - 2.0 * x[1] * x[1] * x[1];
}

/// Example 3 with the diffusion as printed, `g(x) = |x| x`.
pub fn example3_paper() -> SdeSystem {
    SdeSystem::new(
        "example3-paper",
        2,
        1,
        example3_drift,
        |x, out| {
            let r = norm(x);
            out[0] = r * x[0];
            out[1] = r * x[1];
        },
        |x, _, l, out| {
            // ∂(|x| x)/∂x^l = |x| e_l + x x_l / |x|
            let r = norm(x);
            let radial = if r > 0.0 { x[l] / r } else { 0.0 };
            for (i, o) in out.iter_mut().enumerate() {
                let unit = if i == l { r } else { 0.0 };
                *o = unit + x[i] * radial;
            }
        },
    )
    .expect("valid dimensions")
}

/// Example 3 with `g(x) = (x₁², x₂²)ᵀ/√2`, for which the dissipativity
/// identity `−|x|² − (x₁⁴+x₂⁴)/2` holds with `p = 7`.
pub fn example3_consistent() -> SdeSystem {
    SdeSystem::new(
        "example3-consistent",
        2,
        1,
        example3_drift,
        |x, out| {
            out[0] = FRAC_1_SQRT_2 * x[0] * x[0];
            out[1] = FRAC_1_SQRT_2 * x[1] * x[1];
        },
        |x, _, l, out| {
            out.fill(0.0);
            out[l] = 2.0 * FRAC_1_SQRT_2 * x[l];
        },
    )
    .expect("valid dimensions")
}

/// `h(Δ) = Δ^{-1/13}` with `K_R = 18R²`.
pub fn example3_policy() -> TruncationPolicy {
    TruncationPolicy::power(1.0 / 13.0)
        .expect("positive exponent")
        .with_k_plain(|r| 18.0 * r * r)
}

/// Geometric Brownian motion `dx = μx dt + σx dB`, with its exact solution.
pub fn gbm(mu: f64, sigma: f64) -> SdeSystem {
    SdeSystem::new(
        "gbm",
        1,
        1,
        move |x, out| out[0] = mu * x[0],
        move |x, out| out[0] = sigma * x[0],
        move |_, _, _, out| out[0] = sigma,
    )
    .expect("valid dimensions")
    .with_exact_solution(move |x0, t, b, out| {
        out[0] = x0[0] * ((mu - 0.5 * sigma * sigma) * t + sigma * b[0]).exp();
    })
}

/// `g_1 = (x₂, 0)`, `g_2 = (0, x₁)`: the brackets disagree, `L¹g₂ = (0, x₂)`
/// while `L²g₁ = (x₁, 0)`.
pub fn noncommutative_witness() -> SdeSystem {
    SdeSystem::new(
        "noncommutative-witness",
        2,
        2,
        |_, out| out.fill(0.0),
        |x, out| {
            out[0] = x[1];
            out[1] = 0.0;
            out[2] = 0.0;
            out[3] = x[0];
        },
        |_, j, l, out| {
            out.fill(0.0);
            match (j, l) {
                (0, 1) => out[0] = 1.0,
                (1, 0) => out[1] = 1.0,
                _ => {}
            }
        },
    )
    .expect("valid dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn builtins() -> Vec<SdeSystem> {
        LABELS
            .iter()
            .map(|l| lookup(l, &BuiltinParams::default()).unwrap().system)
            .collect()
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for sys in builtins() {
            let pts = sampling::uniform_box(1000, sys.dim(), 5.0, 5);
            for x in &pts {
                for j in 0..sys.noise_dim() {
                    for l in 0..sys.dim() {
                        let exact = sys.eval_diffusion_derivative(x, j, l).unwrap();
                        let fd = sys.finite_difference_derivative(x, j, l, 1e-6).unwrap();
                        for (a, b) in exact.iter().zip(&fd) {
                            let scale = a.abs().max(1.0);
                            assert!(
                                (a - b).abs() <= 1e-4 * scale,
                                "{} at {x:?}, j={j} l={l}: {a} vs {b}",
                                sys.label()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn unknown_label() {
        assert!(matches!(
            lookup("example4", &BuiltinParams::default()),
            Err(Error::UnknownSystem(_))
        ));
    }

    #[test]
    fn builtin_policies_are_decreasing_and_unbounded() {
        let policies = [
            example1_policy(0.5).unwrap(),
            example2_policy().unwrap(),
            example2_printed_policy(0.1).unwrap(),
            example3_policy(),
        ];
        for policy in &policies {
            let probes: Vec<f64> = (1..=40).map(|k| policy.delta_star() / 2f64.powi(k)).collect();
            let radii: Vec<f64> = probes.iter().map(|&d| policy.radius(d).unwrap()).collect();
            assert!(radii.windows(2).all(|w| w[1] > w[0]), "{}", policy.description());
            assert!(radii[39] > radii[0] * 1.2, "{}", policy.description());
        }
    }

    #[test]
    fn gbm_exact_solution() {
        let sys = gbm(0.5, 1.0);
        let x = sys.exact_solution(&[2.0], 1.0, &[0.3]).unwrap();
        assert!((x[0] - 2.0 * 0.3f64.exp()).abs() < 1e-15);
        assert!(example2().exact_solution(&[1.0, 1.0], 1.0, &[0.0, 0.0]).is_none());
    }
}
