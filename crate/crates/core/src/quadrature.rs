//! Composite Gauss–Legendre quadrature with panel doubling.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{sup_distance, CompensatedComplexSum};

/// Nodes per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 12;

/// Controls for every quadrature in the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Initial number of panels per axis; routines may start higher when the
    /// integrand is known to oscillate faster.
    pub panel_count: usize,
    /// Integration over `[e^{-L}, e^{L}]^n`, i.e. `[-L, L]^n` in log coordinates.
    /// Lattice-function routines use it as a lower bound on their window margin.
    pub log_radius: f64,
    /// Successive refinements must differ by less than this (sup norm).
    pub refinement_tol: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { panel_count: 64, log_radius: 30.0, refinement_tol: 1e-9, max_refinements: 8 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panel_count == 0 {
            return Err(Error::invalid("panel_count must be positive"));
        }
        if !(self.log_radius.is_finite() && self.log_radius > 0.0) {
            return Err(Error::invalid("log_radius must be positive"));
        }
        if !(self.refinement_tol.is_finite() && self.refinement_tol > 0.0) {
            return Err(Error::invalid("refinement_tol must be positive"));
        }
        if self.max_refinements == 0 {
            return Err(Error::invalid("max_refinements must be positive"));
        }
        Ok(())
    }

    pub fn with_log_radius(mut self, log_radius: f64) -> Self {
        self.log_radius = log_radius;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.refinement_tol = tol;
        self
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_order` from the Chebyshev initial guesses.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared rule of order [`PANEL_ORDER`].
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
    }
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of a composite rule on one axis.
#[derive(Debug, Clone)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    /// `panels` equal Gauss–Legendre panels on `[a, b]`.
    pub fn composite(a: f64, b: f64, panels: usize, rule: &GaussLegendre) -> Self {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * rule.nodes.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn standard(a: f64, b: f64, panels: usize) -> Self {
        Self::composite(a, b, panels, GaussLegendre::standard())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor-product integral of `f` over the axes, summed in row-major order.
pub fn integrate_tensor<F>(axes: &[AxisRule], mut f: F) -> Complex64
where
    F: FnMut(&[f64]) -> Complex64,
{
    let n = axes.len();
    let mut point = vec![0.0; n];
    let mut acc = CompensatedComplexSum::new();
    let mut idx = vec![0usize; n];
    let total: usize = axes.iter().map(AxisRule::len).product();
    for _ in 0..total {
        let mut w = 1.0;
        for d in 0..n {
            point[d] = axes[d].nodes[idx[d]];
            w *= axes[d].weights[idx[d]];
        }
        acc.add(f(&point) * w);
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    acc.value()
}

/// Result of a refinement loop.
#[derive(Debug, Clone)]
pub struct Refined {
    pub values: Vec<Complex64>,
    pub panels: usize,
    pub refinements: usize,
    pub last_change: f64,
}

/// Evaluates `eval(panels)` with doubling panel counts until two successive
/// results differ by less than `spec.refinement_tol` in sup norm.
pub fn refine_until_stable<F>(spec: &QuadratureSpec, initial_panels: usize, mut eval: F) -> Result<Refined>
where
    F: FnMut(usize) -> Result<Vec<Complex64>>,
{
    spec.validate()?;
    let mut panels = initial_panels.max(1);
    let mut previous = eval(panels)?;
    let mut last_change = f64::INFINITY;
    for level in 1..=spec.max_refinements {
        panels *= 2;
        let current = eval(panels)?;
        last_change = sup_distance(&previous, &current);
        if last_change < spec.refinement_tol {
            return Ok(Refined { values: current, panels, refinements: level, last_change });
        }
        previous = current;
    }
    Err(Error::NonConvergence { refinements: spec.max_refinements, last_change })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(PANEL_ORDER);
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        for deg in 0..(2 * PANEL_ORDER) {
            let approx: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((approx - exact).abs() < 1e-14, "degree {deg}: {approx} vs {exact}");
        }
    }

    #[test]
    fn odd_order_has_center_node() {
        let rule = GaussLegendre::new(5);
        assert!(rule.nodes[2].abs() < 1e-16);
        assert!((rule.weights[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn composite_tensor_integral() {
        let axes = [AxisRule::standard(0.0, std::f64::consts::PI, 4), AxisRule::standard(-1.0, 2.0, 3)];
        let v = integrate_tensor(&axes, |p| Complex64::new(p[0].sin() * p[1] * p[1], 0.0));
        assert!((v.re - 2.0 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_converges_and_fails_cleanly() {
        let spec = QuadratureSpec { panel_count: 1, log_radius: 1.0, refinement_tol: 1e-12, max_refinements: 6 };
        let out = refine_until_stable(&spec, 1, |p| {
            let axis = AxisRule::standard(0.0, 40.0, p);
            Ok(vec![integrate_tensor(std::slice::from_ref(&axis), |u| Complex64::new(u[0].cos(), 0.0))])
        })
        .unwrap();
        assert!((out.values[0].re - 40f64.sin()).abs() < 1e-11);

        let err = refine_until_stable(&spec, 1, |p| Ok(vec![Complex64::new(1.0 / p as f64, 0.0)])).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { refinements: 6, .. }));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        assert!(QuadratureSpec { refinement_tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(QuadratureSpec { log_radius: -1.0, ..Default::default() }.validate().is_err());
    }
}
