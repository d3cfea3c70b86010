//! Numerical Mellin transform pair, band-limit verification and the
//! reproducing-kernel integral.
//!
//! Everything is computed in log coordinates `u = log x`: the Mellin
//! transform on the line `c + it` becomes
//!
//! ```text
//! M[f](c+it) = ∫ f(e^u) e^{<c,u>} e^{i<t,u>} du
//! ```
//!
//! and the cube `[1/R, R]^n` becomes `[-log R, log R]^n`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{check_positive, sinc, LatticeFunction, MultiIndex, SpaceParams};
use crate::numeric::{cin, sici, CompensatedComplexSum};
use crate::quadrature::{refine_until_stable, AxisRule, QuadratureSpec, Refined};

/// A function on `(0, ∞)^n` evaluated through log coordinates.
pub trait LogAxisFunction: Sync {
    /// `f(e^u)`
    fn eval_log(&self, u: &[f64]) -> Complex64;

    /// `e^{<c,u>} f(e^u)`, i.e. `x^c f(x)` at `x = e^u`.
    fn weighted_log(&self, u: &[f64], c: &[f64]) -> Complex64 {
        let dot: f64 = c.iter().zip(u).map(|(a, b)| a * b).sum();
        self.eval_log(u) * dot.exp()
    }

    /// The lattice representation, when the function has one. Transforms
    /// use it to integrate one axis at a time.
    fn as_lattice(&self) -> Option<&LatticeFunction> {
        None
    }
}

impl LogAxisFunction for LatticeFunction {
    fn eval_log(&self, u: &[f64]) -> Complex64 {
        LatticeFunction::eval_log(self, u)
    }

    fn weighted_log(&self, u: &[f64], c: &[f64]) -> Complex64 {
        if c == self.params().c() {
            self.eval_weighted_log(u, &Default::default())
        } else {
            let dot: f64 = c.iter().zip(u).map(|(a, b)| a * b).sum();
            LatticeFunction::eval_log(self, u) * dot.exp()
        }
    }

    fn as_lattice(&self) -> Option<&LatticeFunction> {
        Some(self)
    }
}

/// Adapts a closure on positive points `x` into a [`LogAxisFunction`].
pub struct PositiveFn<F>(pub F);

impl<F> LogAxisFunction for PositiveFn<F>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    fn eval_log(&self, u: &[f64]) -> Complex64 {
        let x: Vec<f64> = u.iter().map(|v| v.exp()).collect();
        (self.0)(&x)
    }
}

/// The function that is identically zero.
pub struct ZeroFunction;

impl LogAxisFunction for ZeroFunction {
    fn eval_log(&self, _u: &[f64]) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

/// Uniform grid `[-t_max, t_max]` per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub t_max: f64,
    pub points_per_axis: usize,
}

impl TGrid {
    pub fn new(t_max: f64, points_per_axis: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(Error::invalid("t_max must be finite and nonnegative"));
        }
        if points_per_axis == 0 || points_per_axis.is_multiple_of(2) {
            return Err(Error::invalid("points_per_axis must be odd so the grid contains 0"));
        }
        Ok(Self { t_max, points_per_axis })
    }

    pub fn step(&self) -> f64 {
        if self.points_per_axis == 1 {
            0.0
        } else {
            2.0 * self.t_max / (self.points_per_axis - 1) as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        let mid = (self.points_per_axis / 2) as i64;
        (0..self.points_per_axis as i64).map(|i| (i - mid) as f64 * h).collect()
    }
}

/// Sampled Mellin transform `t ↦ M[f](c + it)` on a symmetric grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    pub params: SpaceParams,
    pub grid: TGrid,
    pub values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectralDoc {
    t_max: f64,
    points_per_axis: usize,
    values: Vec<[f64; 2]>,
}

impl SpectralFunction {
    pub fn new(params: SpaceParams, grid: TGrid, values: Vec<Complex64>) -> Result<Self> {
        let expected = grid.points_per_axis.pow(params.n() as u32);
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        Ok(Self { params, grid, values })
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SpectralDoc {
            t_max: self.grid.t_max,
            points_per_axis: self.grid.points_per_axis,
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    /// Parses the JSON document; the space is not part of the format.
    pub fn from_json(params: SpaceParams, text: &str) -> Result<Self> {
        let doc: SpectralDoc = serde_json::from_str(text)?;
        let grid = TGrid::new(doc.t_max, doc.points_per_axis).map_err(|e| Error::Parse(e.to_string()))?;
        let values = doc.values.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        Self::new(params, grid, values).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Largest magnitude on the outermost layer of the grid.
    pub fn edge_max(&self) -> f64 {
        let p = self.grid.points_per_axis;
        let n = self.params.n();
        self.values
            .iter()
            .enumerate()
            .filter(|(flat, _)| unflatten(*flat, p, n).iter().any(|&i| i == 0 || i == p - 1))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn unflatten(mut flat: usize, p: usize, n: usize) -> Vec<usize> {
    let mut idx = vec![0; n];
    for slot in idx.iter_mut().rev() {
        *slot = flat % p;
        flat /= p;
    }
    idx
}

/// Convergence information reported with a transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformDiagnostics {
    pub panels: usize,
    pub refinements: usize,
    pub last_change: f64,
    /// Largest `|x^c f(x)|` at the probes `u = ±L e_i`.
    pub tail_probe: f64,
    pub tail_warning: bool,
}

#[derive(Debug, Clone)]
pub struct MellinTransform {
    pub spectrum: SpectralFunction,
    pub diagnostics: TransformDiagnostics,
}

/// `M[f](c+it)` on `grid`, by composite Gauss–Legendre over `[-L, L]^n` in
/// log coordinates with panel doubling until the sup-norm change over the
/// grid drops below `quad.refinement_tol`.
pub fn mellin_transform<F>(f: &F, params: &SpaceParams, grid: &TGrid, quad: &QuadratureSpec) -> Result<MellinTransform>
where
    F: LogAxisFunction + ?Sized,
{
    quad.validate()?;
    let n = params.n();
    let l = quad.log_radius;
    let c = params.c();

    let mut tail_probe: f64 = 0.0;
    for d in 0..n {
        for sign in [-1.0, 1.0] {
            let mut u = vec![0.0; n];
            u[d] = sign * l;
            tail_probe = tail_probe.max(f.weighted_log(&u, c).norm());
        }
    }
    let tail_warning = tail_probe > quad.refinement_tol;
    if tail_warning {
        log::warn!("integrand at the window edge is {tail_probe:e}, above the refinement tolerance");
    }

    let t_nodes = grid.nodes();
    let lattice = f.as_lattice().filter(|g| g.params().c() == c);
    // a lattice window must clear the support so the analytic tails apply
    let half = lattice.map_or(l, |g| l.max((g.support_radius() as f64 + 10.0) / g.params().t()));
    let initial = quad.panel_count.max((half * grid.t_max / std::f64::consts::PI).ceil() as usize);
    let Refined { values, panels, refinements, last_change } = refine_until_stable(quad, initial, |panels| {
        let axis = AxisRule::standard(-half, half, panels);
        Ok(match lattice {
            Some(g) => lattice_transform_on_axis(g, &axis, half, &t_nodes),
            None => transform_on_axes(f, c, &axis, n, &t_nodes),
        })
    })?;
    Ok(MellinTransform {
        spectrum: SpectralFunction::new(params.clone(), *grid, values)?,
        diagnostics: TransformDiagnostics { panels, refinements, last_change, tail_probe, tail_warning },
    })
}

/// Separable transform: samples the weighted integrand on the tensor grid,
/// then contracts one axis at a time against `w_i e^{i t u_i}`.
fn transform_on_axes<F>(f: &F, c: &[f64], axis: &AxisRule, n: usize, t_nodes: &[f64]) -> Vec<Complex64>
where
    F: LogAxisFunction + ?Sized,
{
    let m = axis.len();
    let total = m.pow(n as u32);
    let mut data: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let u: Vec<f64> = unflatten(flat, m, n).into_iter().map(|i| axis.nodes[i]).collect();
            f.weighted_log(&u, c)
        })
        .collect();

    let p = t_nodes.len();
    let kernel: Vec<Complex64> = t_nodes
        .iter()
        .flat_map(|&t| axis.nodes.iter().zip(&axis.weights).map(move |(&u, &w)| Complex64::from_polar(w, t * u)))
        .collect();

    // shape (outer, m, inner) -> (outer, p, inner), one axis at a time
    let mut shape = vec![m; n];
    for d in 0..n {
        let outer: usize = shape[..d].iter().product();
        let inner: usize = shape[d + 1..].iter().product();
        let src = &data;
        let next: Vec<Complex64> = (0..outer * p * inner)
            .into_par_iter()
            .map(|flat| {
                let o = flat / (p * inner);
                let q = (flat / inner) % p;
                let i = flat % inner;
                let row = &kernel[q * m..(q + 1) * m];
                let mut acc = CompensatedComplexSum::new();
                for (j, k) in row.iter().enumerate() {
                    acc.add(src[(o * m + j) * inner + i] * k);
                }
                acc.value()
            })
            .collect();
        data = next;
        shape[d] = p;
    }
    data
}

/// The same tensor rule for a lattice function: every term
/// `a_k Π_d sinc(T u_d − k_d)` is a product, so the rule factors into
/// one-dimensional tables `Σ_i w_i sinc(T u_i − j) e^{i t u_i}`. The part
/// of each one-dimensional integral outside the window is added in closed
/// form ([`sinc_tail`]), which removes the truncation ringing at the band
/// edge.
fn lattice_transform_on_axis(f: &LatticeFunction, axis: &AxisRule, half: f64, t_nodes: &[f64]) -> Vec<Complex64> {
    let n = f.params().n();
    let p = t_nodes.len();
    let Some(ranges) = f.support_box() else {
        return vec![Complex64::new(0.0, 0.0); p.pow(n as u32)];
    };
    let t = f.params().t();
    let lo = ranges.iter().map(|r| r.0).min().unwrap_or(0);
    let hi = ranges.iter().map(|r| r.1).max().unwrap_or(0);
    let width = (hi - lo + 1) as usize;
    let m = axis.len();
    let phases: Vec<Complex64> = t_nodes
        .iter()
        .flat_map(|&tq| axis.nodes.iter().zip(&axis.weights).map(move |(&u, &w)| Complex64::from_polar(w, tq * u)))
        .collect();
    let sincs: Vec<f64> = (lo..=hi).flat_map(|j| axis.nodes.iter().map(move |&u| sinc(t * u - j as f64))).collect();
    let table: Vec<Complex64> = (0..width * p)
        .into_par_iter()
        .map(|flat| {
            let (j, q) = (flat / p, flat % p);
            let row = &phases[q * m..(q + 1) * m];
            let mut acc = CompensatedComplexSum::new();
            for (e, s) in row.iter().zip(&sincs[j * m..(j + 1) * m]) {
                acc.add(e * *s);
            }
            acc.add(sinc_tail(t, lo + j as i64, t_nodes[q], half));
            acc.value()
        })
        .collect();
    let terms: Vec<(&MultiIndex, Complex64)> = f.coeffs().iter().map(|(k, v)| (k, f.weighted_coeff(k, *v))).collect();
    (0..p.pow(n as u32))
        .into_par_iter()
        .map(|flat| {
            let q = unflatten(flat, p, n);
            let mut acc = CompensatedComplexSum::new();
            for (k, a) in &terms {
                let mut v = *a;
                for (d, &kd) in k.0.iter().enumerate() {
                    v *= table[(kd - lo) as usize * p + q[d]];
                }
                acc.add(v);
            }
            acc.value()
        })
        .collect()
}

/// `∫_{|u| > L} sinc(T u − j) e^{i t u} du` for `TL > |j|`.
///
/// With `v = Tu − j` and `ω = t/T` the two tails are
/// `∫_{A±}^∞ sinc(v) e^{±iωv} dv` with `A± = TL ∓ j`, which reduce to sine
/// and cosine integrals. Terms are paired so the logarithmic singularity of
/// `Ci` at the band edge `ω = ±π` cancels analytically.
fn sinc_tail(t: f64, j: i64, tq: f64, l: f64) -> Complex64 {
    use std::f64::consts::PI;
    let omega = tq / t;
    let (a_plus, a_minus) = (t * l - j as f64, t * l + j as f64);
    // −E(a, A+) + E(−a, A−) where E(a, A) = ∫_A^∞ e^{iav}/v dv
    let pair = |a: f64| {
        let (x_plus, x_minus) = (a.abs() * a_plus, a.abs() * a_minus);
        let re = (a_plus / a_minus).ln() - cin(x_plus) + cin(x_minus);
        if a == 0.0 {
            return Complex64::new(re, 0.0);
        }
        let (si_plus, si_minus) = (sici(x_plus).0, sici(x_minus).0);
        Complex64::new(re, -a.signum() * (PI - si_plus - si_minus))
    };
    let bracket = pair(omega - PI) - pair(omega + PI);
    let phase = Complex64::from_polar(1.0, omega * j as f64);
    phase * bracket / (Complex64::new(0.0, 2.0 * PI) * t)
}

/// Result of the inverse transform at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseMellin {
    pub value: Complex64,
    pub edge_warning: bool,
}

/// `(2π)^{-n} ∫ F(c+it) x^{-c-it} dt` by the trapezoid rule over the grid.
pub fn inverse_mellin(spectrum: &SpectralFunction, x: &[f64]) -> Result<InverseMellin> {
    let params = &spectrum.params;
    params.check_dim(x.len())?;
    check_positive(x)?;
    let n = params.n();
    let p = spectrum.grid.points_per_axis;
    let h = spectrum.grid.step();
    let t_nodes = spectrum.grid.nodes();
    let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();

    let axis_weight = |i: usize| {
        if p == 1 {
            1.0
        } else if i == 0 || i == p - 1 {
            0.5 * h
        } else {
            h
        }
    };
    // per-axis factors w_i e^{-i t_i log x}
    let factors: Vec<Vec<Complex64>> = logs
        .iter()
        .map(|&lx| (0..p).map(|i| Complex64::from_polar(axis_weight(i), -t_nodes[i] * lx)).collect())
        .collect();

    let mut acc = CompensatedComplexSum::new();
    for (flat, value) in spectrum.values.iter().enumerate() {
        let idx = unflatten(flat, p, n);
        let mut phase = Complex64::new(1.0, 0.0);
        for (d, &i) in idx.iter().enumerate() {
            phase *= factors[d][i];
        }
        acc.add(value * phase);
    }
    let scale = (-params.c_dot(&logs)).exp() / (2.0 * std::f64::consts::PI).powi(n as i32);

    let max = spectrum.max_abs();
    let edge_warning = max > 0.0 && spectrum.edge_max() > 1e-6 * max;
    if edge_warning {
        log::warn!("spectrum is not negligible at the grid edge; inverse transform is truncated");
    }
    Ok(InverseMellin { value: acc.value() * scale, edge_warning })
}

/// Probe points per coordinate per octave in [`bandlimit_residual`].
pub const PROBES_PER_OCTAVE: usize = 64;

/// Ratio `max_{T_test < ||t||∞ <= 2 T_test} |M[f]| / max_grid |M[f]|`.
///
/// The grid spans `[-2 T_test, 2 T_test]^n` with 64 points per octave per
/// coordinate. A value near zero certifies band-limitation to
/// `[-T_test, T_test]^n` at the resolution of the quadrature.
pub fn bandlimit_residual<F>(f: &F, params: &SpaceParams, t_test: f64, quad: &QuadratureSpec) -> Result<f64>
where
    F: LogAxisFunction + ?Sized,
{
    if !(t_test.is_finite() && t_test > 0.0) {
        return Err(Error::invalid("T_test must be positive"));
    }
    let grid = TGrid::new(2.0 * t_test, 4 * PROBES_PER_OCTAVE + 1)?;
    let transform = mellin_transform(f, params, &grid, quad)?;
    let spectrum = &transform.spectrum;
    let nodes = grid.nodes();
    let n = params.n();
    let edge = t_test * (1.0 + 1e-9);
    let mut probe_max: f64 = 0.0;
    for (flat, v) in spectrum.values.iter().enumerate() {
        let sup = unflatten(flat, grid.points_per_axis, n).into_iter().map(|i| nodes[i].abs()).fold(0.0, f64::max);
        if sup > edge {
            probe_max = probe_max.max(v.norm());
        }
    }
    let global = spectrum.max_abs();
    Ok(if global == 0.0 { 0.0 } else { probe_max / global })
}

/// Log-coordinate window per axis: the support of every function plus
/// `margin_steps` lattice steps, optionally stretched to include `extra`.
fn lattice_window(fs: &[&LatticeFunction], margin_steps: f64, extra: Option<&[f64]>) -> Vec<(f64, f64)> {
    let params = fs[0].params();
    let t = params.t();
    let mut window = vec![(f64::INFINITY, f64::NEG_INFINITY); params.n()];
    for f in fs {
        if let Some(bounds) = f.support_box() {
            for (w, (lo, hi)) in window.iter_mut().zip(bounds) {
                w.0 = w.0.min(lo as f64 / t);
                w.1 = w.1.max(hi as f64 / t);
            }
        }
    }
    if let Some(extra) = extra {
        for (w, &e) in window.iter_mut().zip(extra) {
            w.0 = w.0.min(e);
            w.1 = w.1.max(e);
        }
    }
    for w in window.iter_mut() {
        if !w.0.is_finite() {
            *w = (0.0, 0.0);
        }
        w.0 -= margin_steps / t;
        w.1 += margin_steps / t;
    }
    window
}

fn panels_for(width: f64, t: f64, quad: &QuadratureSpec) -> usize {
    quad.panel_count.max((width * t).ceil() as usize)
}

/// `T^n ∫ f(y) lin_{c/T}((x/y)^T) dy/y` by log-axis quadrature.
///
/// The window covers the support of `f` and `log x` plus a margin of
/// `max(10, ceil(L·T))` lattice steps, with `L = quad.log_radius`.
pub fn reproduce_integral(f: &LatticeFunction, x: &[f64], quad: &QuadratureSpec) -> Result<Complex64> {
    quad.validate()?;
    let params = f.params();
    params.check_dim(x.len())?;
    check_positive(x)?;
    if f.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let t = params.t();
    let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let margin = (quad.log_radius * t).ceil().max(10.0);
    let window = lattice_window(&[f], margin, Some(&logs));
    let width = window.iter().map(|(a, b)| b - a).fold(0.0, f64::max);

    let ranges = f.support_box().expect("nonzero function has a support");
    let terms: Vec<(&MultiIndex, Complex64)> = f.coeffs().iter().map(|(k, v)| (k, f.weighted_coeff(k, *v))).collect();

    // every term a_k Π_d sinc(T v_d − k_d) times the separable kernel is a
    // product, so the tensor rule factors into per-axis tables
    let out = refine_until_stable(quad, panels_for(width, t, quad), |panels| {
        let tables: Vec<Vec<f64>> = window
            .iter()
            .zip(&logs)
            .zip(&ranges)
            .map(|((&(a, b), &lx), &(lo, hi))| {
                let rule = AxisRule::standard(a, b, panels);
                (lo..=hi)
                    .map(|j| {
                        let mut acc = crate::numeric::CompensatedSum::new();
                        for (&v, &w) in rule.nodes.iter().zip(&rule.weights) {
                            acc.add(w * t * sinc(t * (lx - v)) * sinc(t * v - j as f64));
                        }
                        acc.value()
                    })
                    .collect()
            })
            .collect();
        let mut acc = CompensatedComplexSum::new();
        for (k, a) in &terms {
            let w: f64 = k.0.iter().enumerate().map(|(d, &kd)| tables[d][(kd - ranges[d].0) as usize]).product();
            acc.add(a * w);
        }
        Ok(vec![acc.value()])
    })?;
    Ok(out.values[0] * (-params.c_dot(&logs)).exp())
}

/// `||f||²_{X_c^2}` by log-axis quadrature of `|x^c f(x)|²` over the support
/// plus `margin_steps` lattice steps per side. Misses the tail mass beyond
/// the window; used as an independent check on the Parseval norm.
pub fn norm_sq_quadrature(f: &LatticeFunction, margin_steps: f64, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let window = lattice_window(&[f], margin_steps, None);
    Ok(windowed_form(f, f, &window, false, quad)?.re)
}

/// `||f||²_{X_c^2}` over all of `(0, ∞)^n`: the same quadrature as
/// [`norm_sq_quadrature`] inside the window, plus the exact integrals of the
/// kernel products outside it ([`sinc_product_tail`]).
pub fn norm_sq_quadrature_full(f: &LatticeFunction, margin_steps: f64, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let window = lattice_window(&[f], margin_steps, None);
    Ok(windowed_form(f, f, &window, true, quad)?.re)
}

/// `∫ |x^c f(x)|² dx/x` over the box `[-a_i, a_i]` in log coordinates.
pub fn box_energy(f: &LatticeFunction, half_widths: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    f.params().check_dim(half_widths.len())?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let window: Vec<(f64, f64)> = half_widths.iter().map(|&a| (-a, a)).collect();
    Ok(windowed_form(f, f, &window, false, quad)?.re)
}

/// `<f, g>_{X_c^2}` by log-axis quadrature over both supports plus
/// `margin_steps` lattice steps.
pub fn inner_product_quadrature(
    f: &LatticeFunction,
    g: &LatticeFunction,
    margin_steps: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    quad.validate()?;
    if f.params() != g.params() {
        return Err(Error::invalid("functions live in different spaces"));
    }
    if f.is_zero() || g.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let window = lattice_window(&[f, g], margin_steps, None);
    windowed_form(f, g, &window, false, quad)
}

/// `∫_window x^c f(x) · conj(x^c g(x)) dx/x` with a tensor Gauss–Legendre
/// rule, refined by panel doubling.
///
/// Both functions are finite sums of shifted product kernels, so the tensor
/// rule applied to the product equals
/// `Σ_{k,l} a_k conj(b_l) Π_d G_d[k_d, l_d]`, where `G_d` is the same rule
/// applied along axis `d` to `sinc(T u − k_d) sinc(T u − l_d)`. Only the
/// one-dimensional tables are ever sampled.
fn windowed_form(
    f: &LatticeFunction,
    g: &LatticeFunction,
    window: &[(f64, f64)],
    tails: bool,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let t = f.params().t();
    let (Some(fb), Some(gb)) = (f.support_box(), g.support_box()) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let ranges: Vec<(i64, i64)> = fb.iter().zip(&gb).map(|(a, b)| (a.0.min(b.0), a.1.max(b.1))).collect();
    let fa: Vec<(Vec<usize>, Complex64)> = offsets(f, &ranges);
    let ga: Vec<(Vec<usize>, Complex64)> = offsets(g, &ranges);
    let width = window.iter().map(|(a, b)| b - a).fold(0.0, f64::max);

    let out = refine_until_stable(quad, panels_for(width, t, quad), |panels| {
        let grams: Vec<Vec<f64>> = window
            .iter()
            .zip(&ranges)
            .map(|(&(a, b), &(lo, hi))| {
                let mut gram = gram_matrix(AxisRule::standard(a, b, panels), t, lo, hi);
                if tails {
                    add_gram_tails(&mut gram, t, a, b, lo, hi);
                }
                gram
            })
            .collect();
        let mut acc = CompensatedComplexSum::new();
        for (ki, av) in &fa {
            for (li, bv) in &ga {
                let mut w = 1.0;
                for (d, gram) in grams.iter().enumerate() {
                    let m = (ranges[d].1 - ranges[d].0 + 1) as usize;
                    w *= gram[ki[d] * m + li[d]];
                }
                acc.add(av * bv.conj() * w);
            }
        }
        Ok(vec![acc.value()])
    })?;
    Ok(out.values[0])
}

/// Weighted coefficients keyed by their offset within `ranges`.
fn offsets(f: &LatticeFunction, ranges: &[(i64, i64)]) -> Vec<(Vec<usize>, Complex64)> {
    f.coeffs()
        .iter()
        .map(|(k, v)| {
            let idx = k.0.iter().zip(ranges).map(|(&ki, &(lo, _))| (ki - lo) as usize).collect();
            (idx, f.weighted_coeff(k, *v))
        })
        .collect()
}

/// `G[j, k] = Σ_i w_i sinc(T u_i − j) sinc(T u_i − k)` for `j, k ∈ [lo, hi]`, row-major.
fn gram_matrix(rule: AxisRule, t: f64, lo: i64, hi: i64) -> Vec<f64> {
    let m = (hi - lo + 1) as usize;
    let table: Vec<f64> = rule.nodes.iter().flat_map(|&u| (lo..=hi).map(move |k| sinc(t * u - k as f64))).collect();
    let mut gram = vec![0.0; m * m];
    for j in 0..m {
        for k in j..m {
            let mut acc = crate::numeric::CompensatedSum::new();
            for (i, w) in rule.weights.iter().enumerate() {
                acc.add(w * table[i * m + j] * table[i * m + k]);
            }
            gram[j * m + k] = acc.value();
            gram[k * m + j] = acc.value();
        }
    }
    gram
}

/// Adds `∫_{u ∉ [a, b]} sinc(Tu − j) sinc(Tu − k) du` to the Gram entries.
fn add_gram_tails(gram: &mut [f64], t: f64, a: f64, b: f64, lo: i64, hi: i64) {
    let m = (hi - lo + 1) as usize;
    for j in lo..=hi {
        for k in lo..=hi {
            // the lower tail is the upper one mirrored: v -> -v, j -> -j
            let tail = sinc_product_tail(j, k, t * b) + sinc_product_tail(-j, -k, -t * a);
            gram[(j - lo) as usize * m + (k - lo) as usize] += tail / t;
        }
    }
}

/// `∫_B^∞ sinc(v − j) sinc(v − k) dv` for `B > max(j, k)`, in closed form.
///
/// The integrand is `(−1)^{j+k} sin²(πv) / (π² (v − j)(v − k))`. For
/// `j ≠ k` partial fractions and `sin² = (1 − cos 2πv)/2` give logarithms
/// and cosine integrals; for `j = k` one integration by parts gives a sine
/// integral.
fn sinc_product_tail(j: i64, k: i64, big_b: f64) -> f64 {
    use std::f64::consts::PI;
    let sign = if (j + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let (aj, ak) = (big_b - j as f64, big_b - k as f64);
    let core = if j == k {
        let s = crate::numeric::sin_pi(aj);
        s * s / aj + PI * (std::f64::consts::FRAC_PI_2 - sici(2.0 * PI * aj).0)
    } else {
        let ci = |x: f64| sici(2.0 * PI * x).1;
        (0.5 * (ak / aj).ln() + 0.5 * ci(aj) - 0.5 * ci(ak)) / (j - k) as f64
    };
    sign * core / (PI * PI)
}
