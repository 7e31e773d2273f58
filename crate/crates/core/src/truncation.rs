//! Modified truncated coefficients and truncation-radius policies.
//!
//! For a step `Δ` with radius `h = h(Δ)`, the coefficients are rescaled
//! radially outside the ball `|x| ≤ h`:
//!
//! ```text
//! f̃(x) = (|x|/h) f(h x/|x|)       g̃(x) = (|x|/h) g(h x/|x|)
//! G̃_j^l(x) = G_j^l((|x| ∧ h) x/|x|)
//! ```
//!
//! Inside the ball every truncated quantity is the untouched original, and
//! the boundary tie `|x| = h` takes the inside branch.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, check_index, Error, Result};
use crate::system::{norm, DiffusionMatrix, SdeSystem};

pub type RadiusFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;
pub type GrowthFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step-size dependent truncation radius `h(Δ)` on `(0, Δ*]`, with optional
/// local growth constants used only for admissibility diagnostics.
#[derive(Clone)]
pub struct TruncationPolicy {
    radius: RadiusFn,
    delta_star: f64,
    k_bar: Option<GrowthFn>,
    k_plain: Option<GrowthFn>,
    description: String,
}

impl fmt::Debug for TruncationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncationPolicy")
            .field("description", &self.description)
            .field("delta_star", &self.delta_star)
            .field("k_bar", &self.k_bar.is_some())
            .field("k_plain", &self.k_plain.is_some())
            .finish()
    }
}

impl TruncationPolicy {
    pub fn new<H>(description: impl Into<String>, h: H, delta_star: f64) -> Result<Self>
    where
        H: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        if !(delta_star > 0.0 && delta_star <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "delta_star must lie in (0, 1], got {delta_star}"
            )));
        }
        Ok(Self {
            radius: Arc::new(h),
            delta_star,
            k_bar: None,
            k_plain: None,
            description: description.into(),
        })
    }

    /// `h(Δ) = Δ^{-exponent}` on `(0, 1]`.
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "power-law exponent must be positive, got {exponent}"
            )));
        }
        Self::new(
            format!("h(delta) = delta^-{exponent}"),
            move |delta: f64| Ok(delta.powf(-exponent)),
            1.0,
        )
    }

    /// `h = l⁻¹` for a strictly decreasing `l`, solved by bisection per call.
    pub fn inverse_of<L>(description: impl Into<String>, l: L, delta_star: f64) -> Result<Self>
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(description, move |delta: f64| invert_radius(&l, delta), delta_star)
    }

    /// Attaches `K̄_R` (bracket Lipschitz growth).
    pub fn with_k_bar<K: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, k: K) -> Self {
        self.k_bar = Some(Arc::new(k));
        self
    }

    /// Attaches `K_R` (local Lipschitz growth).
    pub fn with_k_plain<K: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, k: K) -> Self {
        self.k_plain = Some(Arc::new(k));
        self
    }

    pub fn delta_star(&self) -> f64 {
        self.delta_star
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn k_bar(&self, r: f64) -> Option<f64> {
        self.k_bar.as_ref().map(|k| k(r))
    }

    pub fn k_plain(&self, r: f64) -> Option<f64> {
        self.k_plain.as_ref().map(|k| k(r))
    }

    /// `h(Δ)`, rejecting steps outside `(0, Δ*]`.
    pub fn radius(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta <= self.delta_star) {
            return Err(Error::DeltaOutOfRange {
                delta,
                delta_star: self.delta_star,
            });
        }
        let h = (self.radius)(delta)?;
        if !(h > 0.0) || h.is_nan() {
            return Err(Error::InvalidInput(format!(
                "truncation radius must be positive, got h({delta}) = {h}"
            )));
        }
        Ok(h)
    }
}

/// Writes the projection of `x` onto the ball into `proj` and returns the
/// rescaling factor `max(1, |x|/radius)`.
pub(crate) fn locate(x: &[f64], radius: f64, proj: &mut [f64]) -> f64 {
    let n = norm(x);
    if n <= radius {
        proj.copy_from_slice(x);
        1.0
    } else {
        outside_branch(x, n, radius, proj)
    }
}

/// The `|x| > radius` formula, applied unconditionally.
pub(crate) fn outside_branch(x: &[f64], n: f64, radius: f64, proj: &mut [f64]) -> f64 {
    let shrink = radius / n;
    for (p, v) in proj.iter_mut().zip(x) {
        *p = v * shrink;
    }
    n / radius
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{x:?}")))
    }
}

/// `(|x| ∧ radius) x/|x|`, with `0 ↦ 0`.
pub fn project(x: &[f64], radius: f64) -> Result<Vec<f64>> {
    check_finite(x)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let mut out = vec![0.0; x.len()];
    locate(x, radius, &mut out);
    Ok(out)
}

fn prepare(sys: &SdeSystem, policy: &TruncationPolicy, delta: f64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_dim(sys.dim(), x.len())?;
    check_finite(x)?;
    let radius = policy.radius(delta)?;
    let mut proj = vec![0.0; x.len()];
    let scale = locate(x, radius, &mut proj);
    Ok((scale, proj))
}

/// `f̃(x)`.
pub fn truncated_drift(sys: &SdeSystem, policy: &TruncationPolicy, delta: f64, x: &[f64]) -> Result<Vec<f64>> {
    let (scale, proj) = prepare(sys, policy, delta, x)?;
    let mut out = sys.eval_drift(&proj)?;
    if scale != 1.0 {
        out.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(out)
}

/// `g̃(x)`, column by column.
pub fn truncated_diffusion(
    sys: &SdeSystem,
    policy: &TruncationPolicy,
    delta: f64,
    x: &[f64],
) -> Result<DiffusionMatrix> {
    let (scale, proj) = prepare(sys, policy, delta, x)?;
    let g = sys.eval_diffusion(&proj)?;
    if scale == 1.0 {
        return Ok(g);
    }
    let data = g.as_slice().iter().map(|v| v * scale).collect();
    DiffusionMatrix::from_columns(g.rows(), g.cols(), data)
}

/// `G̃_j^l(x)`: the derivative at the projected point, without rescaling.
pub fn truncated_diffusion_derivative(
    sys: &SdeSystem,
    policy: &TruncationPolicy,
    delta: f64,
    x: &[f64],
    j: usize,
    l: usize,
) -> Result<Vec<f64>> {
    check_index(j, sys.noise_dim())?;
    check_index(l, sys.dim())?;
    let (_, proj) = prepare(sys, policy, delta, x)?;
    sys.eval_diffusion_derivative(&proj, j, l)
}

/// `L^{j1} g̃_{j2}(x) = Σ_l g̃_{l,j1}(x) G̃_{j2}^l(x)`.
pub fn truncated_levy_term(
    sys: &SdeSystem,
    policy: &TruncationPolicy,
    delta: f64,
    x: &[f64],
    j1: usize,
    j2: usize,
) -> Result<Vec<f64>> {
    check_index(j1, sys.noise_dim())?;
    check_index(j2, sys.noise_dim())?;
    let g = truncated_diffusion(sys, policy, delta, x)?;
    let mut out = vec![0.0; sys.dim()];
    for l in 0..sys.dim() {
        let deriv = truncated_diffusion_derivative(sys, policy, delta, x, j2, l)?;
        let weight = g.get(l, j1);
        for (o, dv) in out.iter_mut().zip(&deriv) {
            *o += weight * dv;
        }
    }
    Ok(out)
}

/// Admissibility diagnostics for a policy over a set of probe steps.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyReport {
    /// `Δ·K̄_{h(Δ)}^{9/4} ≤ 1` at every probe; `None` without `K̄`.
    pub convergence_ok: Option<bool>,
    /// `(Δ, Δ·K̄_{h(Δ)}^{9/4})` per probe.
    pub convergence_values: Vec<(f64, f64)>,
    /// `(Δ, K_{h(Δ)}^6 Δ)` per probe; should shrink as `Δ → 0`.
    pub stability_trend: Vec<(f64, f64)>,
    pub notes: String,
}

pub fn validate_policy(policy: &TruncationPolicy, deltas: &[f64]) -> Result<PolicyReport> {
    let mut notes = Vec::new();
    let radii = deltas
        .iter()
        .map(|&d| policy.radius(d).map(|h| (d, h)))
        .collect::<Result<Vec<_>>>()?;

    let (convergence_ok, convergence_values) = if policy.k_bar.is_some() {
        let values: Vec<(f64, f64)> = radii
            .iter()
            .map(|&(d, h)| (d, d * policy.k_bar(h).unwrap_or(f64::NAN).powf(2.25)))
            .collect();
        let ok = values.iter().all(|&(_, v)| v <= 1.0);
        if !ok {
            notes.push("delta * Kbar^(9/4) exceeds 1 at some probe".to_string());
        }
        (Some(ok), values)
    } else {
        notes.push("convergence constraint not checkable: no Kbar_R supplied".to_string());
        (None, Vec::new())
    };

    let stability_trend = if policy.k_plain.is_some() {
        let trend: Vec<(f64, f64)> = radii
            .iter()
            .map(|&(d, h)| (d, policy.k_plain(h).unwrap_or(f64::NAN).powi(6) * d))
            .collect();
        if trend.iter().any(|&(_, v)| !(v.is_finite() && v > 0.0)) {
            notes.push("stability trend has non-finite or non-positive entries".to_string());
        }
        trend
    } else {
        notes.push("stability constraint not checkable: no K_R supplied".to_string());
        Vec::new()
    };

    Ok(PolicyReport {
        convergence_ok,
        convergence_values,
        stability_trend,
        notes: notes.join("; "),
    })
}

/// Radius demanded by the rate condition, `(Δ^q K̄_{h(Δ)}^{5q/2})^{-1/(p-q)}`,
/// paired with the actual `h(Δ)`. `None` without `K̄` or when `q ≥ p`.
pub fn rate_radius_condition(
    policy: &TruncationPolicy,
    delta: f64,
    p: f64,
    q: f64,
) -> Result<Option<(f64, f64)>> {
    let h = policy.radius(delta)?;
    let Some(k_bar) = policy.k_bar(h) else {
        return Ok(None);
    };
    if !(q < p) {
        return Ok(None);
    }
    let log_required = -(q * delta.ln() + 2.5 * q * k_bar.ln()) / (p - q);
    Ok(Some((log_required.exp(), h)))
}

const MAX_BRACKET_DOUBLINGS: usize = 200;

/// Solves `l(r) = target` for a strictly decreasing, continuous `l`.
///
/// The bracket starts at `[1, 2]` and is doubled outward until it straddles
/// the target; bisection then runs to `|l(r) - target| ≤ 1e-12 · target`.
pub fn invert_radius<L: Fn(f64) -> f64 + ?Sized>(l: &L, target: f64) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidInput(format!("target must be positive, got {target}")));
    }
    let tol = 1e-12 * target;
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    let mut doublings = 0;
    while l(hi) > target {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::NoSolution(format!("no bracket for target {target}")));
        }
    }
    while l(lo) < target {
        hi = lo;
        lo /= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::NoSolution(format!("no bracket for target {target}")));
        }
    }
    if l(lo).is_nan() || l(hi).is_nan() {
        return Err(Error::NoSolution("l is not finite on the bracket".into()));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let value = l(mid);
        if (value - target).abs() <= tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if value > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    [lo, hi]
        .into_iter()
        .find(|&r| (l(r) - target).abs() <= tol)
        .ok_or_else(|| Error::NoSolution(format!("bisection stalled before tolerance for target {target}")))
}
