//! Random unit-norm band-limited functions, Parseval norms, truncation to
//! the finite lattice window and concentration on the cube `[1/R, R]^n`.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{IndexWindow, LatticeFunction, MultiIndex, SpaceParams, DEFAULT_LATTICE_CAP};
use crate::numeric::CompensatedSum;
use crate::quadrature::QuadratureSpec;
use crate::rng::{derive_seed, keyed_rng};
use crate::spectral::box_energy;

/// Points per coordinate of the log-equispaced probe grid on the cube.
pub const PROBE_POINTS: usize = 257;

/// The cube `C_R = [1/R, R]^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationCube {
    #[serde(rename = "R")]
    big_r: f64,
    n: usize,
}

impl ConcentrationCube {
    pub fn new(big_r: f64, n: usize) -> Result<Self> {
        if !(big_r.is_finite() && big_r > 1.0) {
            return Err(Error::invalid(format!("R must exceed 1, got {big_r}")));
        }
        if n == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        Ok(Self { big_r, n })
    }

    pub fn big_r(&self) -> f64 {
        self.big_r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `log R`, the half-width of the cube in log coordinates.
    pub fn log_r(&self) -> f64 {
        self.big_r.ln()
    }

    /// `((R² − 1)/R)^n`
    pub fn volume(&self) -> f64 {
        ((self.big_r * self.big_r - 1.0) / self.big_r).powi(self.n as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n && x.iter().all(|&v| v >= 1.0 / self.big_r && v <= self.big_r)
    }

    fn check_space(&self, params: &SpaceParams) -> Result<()> {
        if params.n() != self.n {
            return Err(Error::DimensionMismatch { expected: params.n(), got: self.n });
        }
        Ok(())
    }
}

/// Envelope applied to the random coefficients as a function of `|k|∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Decay {
    Flat,
    Geometric { q: f64 },
}

impl Decay {
    fn factor(&self, k: &MultiIndex) -> f64 {
        match *self {
            Decay::Flat => 1.0,
            Decay::Geometric { q } => q.powi(k.sup_norm() as i32),
        }
    }
}

/// How [`random_band_function`] draws its coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisProfile {
    pub seed: u64,
    /// Coefficients are drawn for `k ∈ [−K, K]^n`.
    pub support_half_width: u32,
    pub decay: Decay,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_delta: Option<f64>,
    /// Total number of draws allowed when `target_delta` is set.
    pub max_rejections: usize,
}

impl SynthesisProfile {
    pub fn validate(&self) -> Result<()> {
        if self.support_half_width == 0 {
            return Err(Error::invalid("support_half_width must be at least 1"));
        }
        if let Decay::Geometric { q } = self.decay {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::invalid(format!("geometric decay needs 0 < q < 1, got {q}")));
            }
        }
        if let Some(d) = self.target_delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::invalid(format!("target_delta must lie in (0, 1), got {d}")));
            }
        }
        if self.max_rejections == 0 {
            return Err(Error::invalid("max_rejections must be positive"));
        }
        Ok(())
    }
}

/// Energy of a function inside the cube relative to its total energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub cube_energy: f64,
    pub total_norm_sq: f64,
    pub delta: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub quad: QuadratureSpec,
}

/// `sqrt(T^{-n} Σ |c_k|² e^{2<c,k>/T})`, summed from the smallest `|k|∞` outward.
pub fn norm_parseval(f: &LatticeFunction) -> Result<f64> {
    let mut terms: Vec<(&MultiIndex, f64)> =
        f.coeffs().iter().map(|(k, v)| (k, f.weighted_coeff(k, *v).norm_sqr())).collect();
    if let Some((k, _)) = terms.iter().find(|(_, w)| !w.is_finite()) {
        return Err(Error::Overflow(format!("weighted coefficient at {k} exceeds the floating-point range")));
    }
    terms.sort_by(|a, b| a.0.sup_norm().cmp(&b.0.sup_norm()).then_with(|| a.0.cmp(b.0)));
    let sum: CompensatedSum = terms.into_iter().map(|(_, w)| w).collect();
    let params = f.params();
    let norm_sq = sum.value() * params.t().powi(-(params.n() as i32));
    if !norm_sq.is_finite() {
        return Err(Error::Overflow("Parseval sum exceeds the floating-point range".into()));
    }
    Ok(norm_sq.sqrt())
}

/// Output of [`random_band_function`].
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub function: LatticeFunction,
    /// Present when a cube was supplied.
    pub report: Option<ConcentrationReport>,
    /// Number of draws made, including the accepted one.
    pub attempts: usize,
}

/// Draws a unit-norm function with i.i.d. standard normal coefficients
/// (real and imaginary parts) on `[−K, K]^n`, shaped by the decay profile.
///
/// With a cube and a `target_delta`, draws repeat until the measured
/// concentration reaches the target. Draw `i` uses the substream
/// `derive_seed(seed, i)`, so the result depends only on the profile.
pub fn random_band_function(
    params: &SpaceParams,
    profile: &SynthesisProfile,
    cube: Option<&ConcentrationCube>,
    quad: &QuadratureSpec,
) -> Result<Synthesized> {
    profile.validate()?;
    if let Some(cube) = cube {
        cube.check_space(params)?;
    }
    let k = profile.support_half_width as i64;
    let side = 2 * k as u128 + 1;
    let count = side.checked_pow(params.n() as u32).unwrap_or(u128::MAX);
    if count > DEFAULT_LATTICE_CAP {
        return Err(Error::SizeOverflow { requested: count, cap: DEFAULT_LATTICE_CAP });
    }

    let draws = if profile.target_delta.is_some() && cube.is_some() { profile.max_rejections } else { 1 };
    let mut best_delta = f64::INFINITY;
    for attempt in 0..draws {
        let f = draw_unit(params, profile, derive_seed(profile.seed, attempt as u64))?;
        let Some(cube) = cube else {
            return Ok(Synthesized { function: f, report: None, attempts: 1 });
        };
        let report = concentration(&f, cube, quad)?;
        match profile.target_delta {
            Some(target) if report.delta > target => best_delta = best_delta.min(report.delta),
            _ => return Ok(Synthesized { function: f, report: Some(report), attempts: attempt + 1 }),
        }
    }
    Err(Error::RejectionExhausted { attempts: draws, best_delta })
}

fn draw_unit(params: &SpaceParams, profile: &SynthesisProfile, seed: u64) -> Result<LatticeFunction> {
    let mut rng = keyed_rng(seed, 0);
    let half = profile.support_half_width as i64;
    let pairs: Vec<(MultiIndex, Complex64)> = crate::lattice::cube_indices(params.n(), half)
        .map(|k| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let scale = profile.decay.factor(&k);
            (k, Complex64::new(re * scale, im * scale))
        })
        .collect();
    let f = LatticeFunction::from_pairs(params.clone(), pairs)?;
    let norm = norm_parseval(&f)?;
    if norm == 0.0 {
        return Err(Error::invalid("all coefficients vanished; cannot normalize"));
    }
    Ok(f.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Keeps the coefficients with `k ∈ [−N/2, N/2]^n`.
pub fn truncate_to_bn(f: &LatticeFunction, big_n: u64) -> LatticeFunction {
    f.restrict(&IndexWindow::Cube { half_width: (big_n / 2) as f64 })
}

/// `T^{n/2} ‖f‖ (4 / (π² (N − 2T log R)))^{n/2}` when `N > 2T log R`, else `+∞`.
pub fn truncation_error_bound(big_n: u64, params: &SpaceParams, cube: &ConcentrationCube, norm: f64) -> f64 {
    let gap = big_n as f64 - 2.0 * params.t() * cube.log_r();
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    if norm == 0.0 {
        return 0.0;
    }
    let half_n = params.n() as f64 / 2.0;
    params.t().powf(half_n) * norm * (4.0 / (std::f64::consts::PI.powi(2) * gap)).powf(half_n)
}

/// Least integer `N > 4Tπ^{−2}ε^{−2/n} + 2T log R`.
pub fn min_n_for_error(epsilon: f64, params: &SpaceParams, cube: &ConcentrationCube) -> Result<u64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let t = params.t();
    let n = params.n() as f64;
    let threshold = 4.0 * t / std::f64::consts::PI.powi(2) * epsilon.powf(-2.0 / n) + 2.0 * t * cube.log_r();
    let big_n = threshold.floor() + 1.0;
    let side = 2.0 * (big_n / 2.0).floor() + 1.0;
    let count = side.powf(n);
    if !(count.is_finite() && count <= DEFAULT_LATTICE_CAP as f64) {
        return Err(Error::SizeOverflow {
            requested: if count.is_finite() { count as u128 } else { u128::MAX },
            cap: DEFAULT_LATTICE_CAP,
        });
    }
    Ok(big_n as u64)
}

/// Measures `δ = 1 − ∫_{C_R} |f|² x^{2c−1} dx / ‖f‖²`.
pub fn concentration(
    f: &LatticeFunction,
    cube: &ConcentrationCube,
    quad: &QuadratureSpec,
) -> Result<ConcentrationReport> {
    cube.check_space(f.params())?;
    let total_norm_sq = norm_parseval(f)?.powi(2);
    if total_norm_sq == 0.0 {
        return Err(Error::invalid("concentration of the zero function is undefined"));
    }
    let half_widths = vec![cube.log_r(); cube.n()];
    let cube_energy = box_energy(f, &half_widths, quad)?;
    let mut delta = 1.0 - cube_energy / total_norm_sq;
    if delta < 0.0 {
        if delta < -1e-9 {
            return Err(Error::ConcentrationOutOfRange { delta });
        }
        delta = 0.0;
    }
    Ok(ConcentrationReport { cube_energy, total_norm_sq, delta, big_r: cube.big_r(), quad: quad.clone() })
}

/// `max |x^c (f − g)(x)|` over the log-equispaced probe grid on the cube.
pub fn probe_sup_distance(f: &LatticeFunction, g: &LatticeFunction, cube: &ConcentrationCube) -> Result<f64> {
    cube.check_space(f.params())?;
    let diff = f.sub(g)?;
    let axis = probe_axis(cube);
    let axes: Vec<&[f64]> = vec![axis.as_slice(); cube.n()];
    let mut sup: f64 = 0.0;
    diff.for_each_weighted_on_grid(&axes, |_, v| sup = sup.max(v.norm()));
    Ok(sup)
}

/// Log coordinates of the probe grid along one axis.
pub fn probe_axis(cube: &ConcentrationCube) -> Vec<f64> {
    let a = cube.log_r();
    let h = 2.0 * a / (PROBE_POINTS - 1) as f64;
    (0..PROBE_POINTS).map(|i| -a + i as f64 * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(seed: u64) -> SynthesisProfile {
        SynthesisProfile { seed, support_half_width: 3, decay: Decay::Flat, target_delta: None, max_rejections: 1 }
    }

    #[test]
    fn one_term_parseval() {
        let params = SpaceParams::new(vec![0.3, -0.2], 2.0).unwrap();
        let k = MultiIndex(vec![2, 5]);
        let f = LatticeFunction::single(params, k, Complex64::new(1.0, 0.0)).unwrap();
        let expected = 2f64.powi(-1) * ((0.3 * 2.0 - 0.2 * 5.0) / 2.0f64).exp();
        assert!((norm_parseval(&f).unwrap() - expected).abs() < 1e-15);
        assert_eq!(norm_parseval(&LatticeFunction::zero(SpaceParams::one_dim(0.0, 1.0).unwrap())).unwrap(), 0.0);
    }

    #[test]
    fn parseval_overflow_is_an_error() {
        let params = SpaceParams::one_dim(1.0, 1e-3).unwrap();
        let f = LatticeFunction::single(params, MultiIndex(vec![10]), Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(norm_parseval(&f), Err(Error::Overflow(_))));
    }

    #[test]
    fn synthesized_functions_have_unit_norm() {
        let params = SpaceParams::one_dim(0.5, 2.0).unwrap();
        for seed in 0..20 {
            let f = random_band_function(&params, &profile(seed), None, &QuadratureSpec::default()).unwrap();
            assert!((norm_parseval(&f.function).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(f.function.coeffs().len(), 7);
        }
    }

    #[test]
    fn geometric_decay_is_validated() {
        let params = SpaceParams::one_dim(0.0, 1.0).unwrap();
        let mut p = profile(1);
        p.decay = Decay::Geometric { q: 1.5 };
        assert!(random_band_function(&params, &p, None, &QuadratureSpec::default()).is_err());
        p.decay = Decay::Geometric { q: 0.5 };
        assert!(random_band_function(&params, &p, None, &QuadratureSpec::default()).is_ok());
    }

    #[test]
    fn truncation_bound_examples() {
        let params = SpaceParams::one_dim(0.0, 1.0).unwrap();
        let cube = ConcentrationCube::new(std::f64::consts::E, 1).unwrap();
        assert!(truncation_error_bound(2, &params, &cube, 1.0).is_infinite());
        assert_eq!(truncation_error_bound(10, &params, &cube, 0.0), 0.0);
        assert_eq!(min_n_for_error(0.1, &params, &cube).unwrap(), 43);
    }

    #[test]
    fn truncation_keeps_center_window() {
        let params = SpaceParams::one_dim(0.0, 1.0).unwrap();
        let f = random_band_function(&params, &profile(4), None, &QuadratureSpec::default()).unwrap().function;
        let g = truncate_to_bn(&f, 0);
        assert_eq!(g.coeffs().len(), 1);
        assert_eq!(g.coeff(&MultiIndex(vec![0])), f.coeff(&MultiIndex(vec![0])));
        assert_eq!(truncate_to_bn(&f, 6), f);
        assert_eq!(truncate_to_bn(&f, 5).coeffs().len(), 5);
    }

    #[test]
    fn cube_volume() {
        let cube = ConcentrationCube::new(2.0, 2).unwrap();
        assert!((cube.volume() - 2.25).abs() < 1e-15);
        assert!(cube.contains(&[0.5, 2.0]));
        assert!(!cube.contains(&[0.49, 1.0]));
        assert!(ConcentrationCube::new(1.0, 1).is_err());
    }

    #[test]
    fn rejection_exhaustion_reports_best_delta() {
        let params = SpaceParams::one_dim(0.0, 1.0).unwrap();
        let cube = ConcentrationCube::new(1.1, 1).unwrap();
        let p = SynthesisProfile { target_delta: Some(0.01), max_rejections: 3, ..profile(5) };
        match random_band_function(&params, &p, Some(&cube), &QuadratureSpec::default()) {
            Err(Error::RejectionExhausted { attempts: 3, best_delta }) => {
                assert!(best_delta > 0.01 && best_delta <= 1.0)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
