//! SDE problem definitions and sampled audits of the standing assumptions.
//!
//! A system is the autonomous Itô equation
//!
//! ```text
//! dx = f(x) dt + Σ_j g_j(x) dB^j
//! ```
//!
//! with state dimension `d` and noise dimension `m`. Besides `f` and `g`
//! every system carries the analytic derivative vectors
//! `G_j^l(x) = ∂g_j/∂x^l`, which the Milstein correction needs exactly.
//! Indices are zero-based throughout the API.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, check_index, Error, Result};

/// `x ↦ out`, where `out` has the length fixed by the owning system.
pub type VectorField = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// `(x, j, l) ↦ G_j^l(x)`, written into a length-`d` buffer.
pub type DerivativeField = Arc<dyn Fn(&[f64], usize, usize, &mut [f64]) + Send + Sync>;

/// `(x0, t, B(t)) ↦ x(t)`, for the few systems with a closed-form solution.
pub type ExactSolution = Arc<dyn Fn(&[f64], f64, &[f64], &mut [f64]) + Send + Sync>;

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// A `d × m` diffusion matrix stored column-major, so column `j` is `g_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DiffusionMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `g_{l,j}`.
    pub fn get(&self, l: usize, j: usize) -> f64 {
        self.data[j * self.rows + l]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Trace norm `sqrt(trace(AᵀA))`.
    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }
}

/// An autonomous SDE with commutative-noise Milstein data.
#[derive(Clone)]
pub struct SdeSystem {
    label: String,
    dim: usize,
    noise_dim: usize,
    drift: VectorField,
    diffusion: VectorField,
    derivative: DerivativeField,
    exact: Option<ExactSolution>,
}

impl fmt::Debug for SdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeSystem")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("noise_dim", &self.noise_dim)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl SdeSystem {
    /// Builds a system. `diffusion` must fill a column-major `d × m` buffer;
    /// `derivative(x, j, l, out)` must write `∂g_j/∂x^l` into `out`.
    pub fn new<F, G, D>(
        label: impl Into<String>,
        dim: usize,
        noise_dim: usize,
        drift: F,
        diffusion: G,
        derivative: D,
    ) -> Result<Self>
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        D: Fn(&[f64], usize, usize, &mut [f64]) + Send + Sync + 'static,
    {
        if dim == 0 || noise_dim == 0 {
            return Err(Error::InvalidInput(
                "state and noise dimensions must be positive".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            dim,
            noise_dim,
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            derivative: Arc::new(derivative),
            exact: None,
        })
    }

    pub fn with_exact_solution<E>(mut self, exact: E) -> Self
    where
        E: Fn(&[f64], f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact.is_some()
    }

    pub(crate) fn drift_into(&self, x: &[f64], out: &mut [f64]) {
        (self.drift)(x, out)
    }

    pub(crate) fn diffusion_into(&self, x: &[f64], out: &mut [f64]) {
        (self.diffusion)(x, out)
    }

    pub(crate) fn derivative_into(&self, x: &[f64], j: usize, l: usize, out: &mut [f64]) {
        (self.derivative)(x, j, l, out)
    }

    /// `f(x)`.
    pub fn eval_drift(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let mut out = vec![0.0; self.dim];
        self.drift_into(x, &mut out);
        Ok(out)
    }

    /// `g(x)` with columns `g_1 .. g_m`.
    pub fn eval_diffusion(&self, x: &[f64]) -> Result<DiffusionMatrix> {
        check_dim(self.dim, x.len())?;
        let mut out = DiffusionMatrix::zeros(self.dim, self.noise_dim);
        self.diffusion_into(x, &mut out.data);
        Ok(out)
    }

    /// `G_j^l(x) = ∂g_j/∂x^l`.
    pub fn eval_diffusion_derivative(&self, x: &[f64], j: usize, l: usize) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        check_index(j, self.noise_dim)?;
        check_index(l, self.dim)?;
        let mut out = vec![0.0; self.dim];
        self.derivative_into(x, j, l, &mut out);
        Ok(out)
    }

    /// Central finite difference of `g_j` along `x^l`. Diagnostic only.
    pub fn finite_difference_derivative(
        &self,
        x: &[f64],
        j: usize,
        l: usize,
        step: f64,
    ) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        check_index(j, self.noise_dim)?;
        check_index(l, self.dim)?;
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[l] += step;
        minus[l] -= step;
        let gp = self.eval_diffusion(&plus)?;
        let gm = self.eval_diffusion(&minus)?;
        Ok(gp
            .column(j)
            .iter()
            .zip(gm.column(j))
            .map(|(a, b)| (a - b) / (2.0 * step))
            .collect())
    }

    /// The bracket `L^{j1} g_{j2}(x) = Σ_l g_{l,j1}(x) G_{j2}^l(x)`.
    pub fn levy_term(&self, x: &[f64], j1: usize, j2: usize) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        check_index(j1, self.noise_dim)?;
        check_index(j2, self.noise_dim)?;
        let g = self.eval_diffusion(x)?;
        let mut out = vec![0.0; self.dim];
        let mut deriv = vec![0.0; self.dim];
        for l in 0..self.dim {
            self.derivative_into(x, j2, l, &mut deriv);
            let weight = g.get(l, j1);
            for (o, dv) in out.iter_mut().zip(&deriv) {
                *o += weight * dv;
            }
        }
        Ok(out)
    }

    /// Closed-form `x(t)` given the Brownian value `B(t)`, if the system has one.
    pub fn exact_solution(&self, x0: &[f64], t: f64, brownian: &[f64]) -> Option<Vec<f64>> {
        let exact = self.exact.as_ref()?;
        let mut out = vec![0.0; self.dim];
        exact(x0, t, brownian, &mut out);
        Some(out)
    }
}

/// Constants of the Khasminskii-type and dissipativity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionParams {
    pub p: f64,
    pub k: Option<f64>,
    pub lambda: Option<f64>,
}

impl AssumptionParams {
    /// Parameters for `<x,f> + (p-1)/2 Σ|g_j|² ≤ K(1+|x|²)`.
    pub fn khasminskii(p: f64, k: f64) -> Result<Self> {
        Self::validate_p(p)?;
        if !(k > 0.0) {
            return Err(Error::InvalidInput(format!("K must be positive, got {k}")));
        }
        Ok(Self {
            p,
            k: Some(k),
            lambda: None,
        })
    }

    /// Parameters for `<x,f> + (p-1)/2 Σ|g_j|² ≤ -λ|x|²`.
    pub fn dissipative(p: f64, lambda: f64) -> Result<Self> {
        Self::validate_p(p)?;
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            p,
            k: None,
            lambda: Some(lambda),
        })
    }

    fn validate_p(p: f64) -> Result<()> {
        if p > 2.0 && p.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("moment order p must exceed 2, got {p}")))
        }
    }
}

/// Outcome of a sampled inequality audit. A margin `≤ 0` means the
/// inequality holds at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub passed: bool,
    pub worst_point: Vec<f64>,
    pub worst_margin: f64,
    pub samples_tested: usize,
}

fn audit<F>(dim: usize, samples: &[Vec<f64>], mut margin: F) -> Result<CheckReport>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if samples.is_empty() {
        return Err(Error::InvalidInput("sample set is empty".into()));
    }
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_point = vec![0.0; dim];
    for x in samples {
        check_dim(dim, x.len())?;
        let mut value = margin(x)?;
        if value.is_nan() {
            value = f64::INFINITY;
        }
        if value > worst_margin {
            worst_margin = value;
            worst_point.copy_from_slice(x);
        }
    }
    Ok(CheckReport {
        passed: worst_margin <= 0.0,
        worst_point,
        worst_margin,
        samples_tested: samples.len(),
    })
}

/// Largest bracket asymmetry `|L^{j1}g_{j2} − L^{j2}g_{j1}|` at `x`.
pub fn commutator_gap(sys: &SdeSystem, x: &[f64]) -> Result<f64> {
    let m = sys.noise_dim();
    let mut gap = 0.0_f64;
    for j1 in 0..m {
        for j2 in (j1 + 1)..m {
            let a = sys.levy_term(x, j1, j2)?;
            let b = sys.levy_term(x, j2, j1)?;
            let diff: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
            let n = norm(&diff);
            gap = if n.is_nan() { f64::INFINITY } else { gap.max(n) };
        }
    }
    Ok(gap)
}

/// Audits `L^{j1}g_{j2} = L^{j2}g_{j1}` on the samples; margin is `gap − tol`.
pub fn check_commutativity(sys: &SdeSystem, samples: &[Vec<f64>], tol: f64) -> Result<CheckReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    audit(sys.dim(), samples, |x| Ok(commutator_gap(sys, x)? - tol))
}

/// `<x,f(x)> + (p-1)/2 Σ_j |g_j(x)|²`.
pub fn khasminskii_lhs(sys: &SdeSystem, p: f64, x: &[f64]) -> Result<f64> {
    let f = sys.eval_drift(x)?;
    let g = sys.eval_diffusion(x)?;
    let g_sq = g.as_slice().iter().map(|v| v * v).sum::<f64>();
    Ok(dot(x, &f) + 0.5 * (p - 1.0) * g_sq)
}

/// Audits the Khasminskii-type bound; margin is `LHS − K(1+|x|²)`.
pub fn check_khasminskii(
    sys: &SdeSystem,
    params: &AssumptionParams,
    samples: &[Vec<f64>],
) -> Result<CheckReport> {
    let k = params
        .k
        .ok_or_else(|| Error::InvalidInput("Khasminskii check needs K".into()))?;
    audit(sys.dim(), samples, |x| {
        let r2 = dot(x, x);
        Ok(khasminskii_lhs(sys, params.p, x)? - k * (1.0 + r2))
    })
}

/// Audits the dissipativity bound; margin is `LHS + λ|x|²`.
pub fn check_dissipativity(
    sys: &SdeSystem,
    params: &AssumptionParams,
    samples: &[Vec<f64>],
) -> Result<CheckReport> {
    let lambda = params
        .lambda
        .ok_or_else(|| Error::InvalidInput("dissipativity check needs lambda".into()))?;
    audit(sys.dim(), samples, |x| {
        let r2 = dot(x, x);
        Ok(khasminskii_lhs(sys, params.p, x)? + lambda * r2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    fn example2() -> SdeSystem {
        registry::example2()
    }

    #[test]
    fn drift_examples() {
        assert_eq!(example2().eval_drift(&[1.0, 1.0]).unwrap(), vec![-1.0, 1.0]);
        let ex3 = registry::example3_paper();
        assert_eq!(ex3.eval_drift(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(ex3.eval_drift(&[1.0, -1.0]).unwrap(), vec![-2.0, 4.0]);
    }

    #[test]
    fn drift_rejects_wrong_dimension() {
        let err = example2().eval_drift(&[1.0]).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 2, got: 1 });
    }

    #[test]
    fn diffusion_examples() {
        let sys = example2();
        let g = sys.eval_diffusion(&[1.0, 1.0]).unwrap();
        assert_eq!(g.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        let g = sys.eval_diffusion(&[0.0, 0.0]).unwrap();
        assert!(g.as_slice().iter().all(|v| *v == 0.0));
        let g = sys.eval_diffusion(&[2.0, 3.0]).unwrap();
        assert_eq!((g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1)), (4.0, 0.0, 0.0, 3.0));
        assert!(sys.eval_diffusion(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn levy_term_examples() {
        let sys = example2();
        assert_eq!(sys.levy_term(&[2.0, 5.0], 0, 0).unwrap(), vec![16.0, 0.0]);
        assert_eq!(sys.levy_term(&[2.0, 5.0], 0, 1).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            sys.levy_term(&[2.0, 5.0], 2, 0),
            Err(Error::IndexOutOfRange { index: 2, limit: 2 })
        ));

        let constant = SdeSystem::new(
            "const",
            2,
            2,
            |_, out| out.fill(0.0),
            |_, out| out.copy_from_slice(&[1.0, 2.0, 3.0, 4.0]),
            |_, _, _, out| out.fill(0.0),
        )
        .unwrap();
        for j1 in 0..2 {
            for j2 in 0..2 {
                assert_eq!(constant.levy_term(&[7.0, -3.0], j1, j2).unwrap(), vec![0.0, 0.0]);
            }
        }
    }

    #[test]
    fn commutativity_examples() {
        let samples = crate::sampling::uniform_box(100, 2, 5.0, 11);
        let report = check_commutativity(&example2(), &samples, 1e-10).unwrap();
        assert!(report.passed);
        assert_eq!(report.samples_tested, 100);

        let ex1 = registry::example1();
        assert!(check_commutativity(&ex1, &samples, 1e-10).unwrap().passed);

        let witness = registry::noncommutative_witness();
        let report = check_commutativity(&witness, &[vec![1.0, 1.0]], 1e-10).unwrap();
        assert!(!report.passed);
        assert_eq!(witness.levy_term(&[1.0, 1.0], 0, 1).unwrap(), vec![0.0, 1.0]);
        assert_eq!(witness.levy_term(&[1.0, 1.0], 1, 0).unwrap(), vec![1.0, 0.0]);
        assert!((report.worst_margin - (2f64.sqrt() - 1e-10)).abs() < 1e-15);
        assert!(check_commutativity(&witness, &samples, 0.0).is_err());
    }

    #[test]
    fn khasminskii_examples() {
        let params = AssumptionParams::khasminskii(7.0, 4.0).unwrap();
        let r = check_khasminskii(&example2(), &params, &[vec![1.0, 1.0]]).unwrap();
        assert!(r.passed);
        assert_eq!(r.worst_margin, -6.0);

        let r = check_khasminskii(&example2(), &params, &[vec![0.0, 0.0]]).unwrap();
        assert_eq!(r.worst_margin, -4.0);

        let ex1 = registry::example1();
        let params = AssumptionParams::khasminskii(5.0, 1.0).unwrap();
        // 1 - 2e + 2e
        assert!((khasminskii_lhs(&ex1, 5.0, &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(check_khasminskii(&ex1, &params, &[vec![1.0, 0.0]]).unwrap().passed);
    }

    #[test]
    fn dissipativity_examples() {
        let params = AssumptionParams::dissipative(7.0, 1.0).unwrap();
        let consistent = registry::example3_consistent();
        let r = check_dissipativity(&consistent, &params, &[vec![1.0, -1.0]]).unwrap();
        assert!(r.passed);
        assert!((r.worst_margin + 1.0).abs() < 1e-12);

        let r = check_dissipativity(&consistent, &params, &[vec![0.0, 0.0]]).unwrap();
        assert!(r.passed);
        assert_eq!(r.worst_margin, 0.0);

        let printed = registry::example3_paper();
        assert!((khasminskii_lhs(&printed, 7.0, &[1.0, -1.0]).unwrap() - 6.0).abs() < 1e-12);
        let r = check_dissipativity(&printed, &params, &[vec![1.0, -1.0]]).unwrap();
        assert!(!r.passed);
        assert!((r.worst_margin - 8.0).abs() < 1e-12);
    }

    #[test]
    fn assumption_params_validate() {
        assert!(AssumptionParams::khasminskii(2.0, 1.0).is_err());
        assert!(AssumptionParams::khasminskii(3.0, 0.0).is_err());
        assert!(AssumptionParams::dissipative(7.0, -1.0).is_err());
        let p = AssumptionParams::khasminskii(7.0, 4.0).unwrap();
        assert!(check_dissipativity(&example2(), &p, &[vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn empty_samples_rejected() {
        let p = AssumptionParams::khasminskii(7.0, 4.0).unwrap();
        assert!(check_khasminskii(&example2(), &p, &[]).is_err());
    }

    #[test]
    fn nan_margin_counts_as_violation() {
        let bad = SdeSystem::new(
            "nan",
            1,
            1,
            |_, out| out[0] = f64::NAN,
            |_, out| out[0] = 0.0,
            |_, _, _, out| out[0] = 0.0,
        )
        .unwrap();
        let p = AssumptionParams::khasminskii(3.0, 1.0).unwrap();
        let r = check_khasminskii(&bad, &p, &[vec![1.0]]).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_margin, f64::INFINITY);
    }
}
