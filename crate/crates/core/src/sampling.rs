//! Uniform random points on the cube, the centred variables `Z_j`, the
//! empirical frame functionals and Monte Carlo estimates of how often the
//! sampling inequality fails.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{main_theorem_constants, saturating_exp, Variant};
use crate::error::{Error, Result};
use crate::lattice::{LatticeFunction, SpaceParams};
use crate::numeric::{CompensatedSum, Z_975};
use crate::quadrature::QuadratureSpec;
use crate::rng::{derive_seed, CounterStream};
use crate::spectral::{box_energy, LogAxisFunction};
use crate::synthesis::{
    concentration, norm_parseval, probe_sup_distance, random_band_function, ConcentrationCube, SynthesisProfile,
};

/// `r` points drawn uniformly (Lebesgue) from `[1/R, R]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePointSet {
    pub points: Vec<Vec<f64>>,
    pub r: usize,
    pub seed: u64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

/// Coordinate `d` of point `j` is the `(j·n + d)`-th word of the stream
/// keyed by `seed`, mapped linearly onto `[1/R, R]`.
pub fn draw_uniform(r: usize, cube: &ConcentrationCube, seed: u64) -> Result<SamplePointSet> {
    if r == 0 {
        return Err(Error::invalid("r must be positive"));
    }
    let n = cube.n();
    let lo = 1.0 / cube.big_r();
    let width = cube.big_r() - lo;
    let mut stream = CounterStream::new(seed, 0);
    stream.seek(0);
    let points = (0..r).map(|_| (0..n).map(|_| (lo + width * stream.next_f64()).min(cube.big_r())).collect()).collect();
    Ok(SamplePointSet { points, r, seed, big_r: cube.big_r() })
}

fn logs_of(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.ln()).collect()
}

/// `|f(x)|² x^{2c−1}` at `x = e^u`.
fn density_at<F: LogAxisFunction + ?Sized>(f: &F, u: &[f64], c: &[f64]) -> f64 {
    f.weighted_log(u, c).norm_sqr() * (-u.iter().sum::<f64>()).exp()
}

/// `Z = |f(x)|² x^{2c−1} − cube_energy / vol(C_R)`.
pub fn z_variable<F: LogAxisFunction + ?Sized>(
    f: &F,
    x: &[f64],
    c: &[f64],
    cube: &ConcentrationCube,
    cube_energy: f64,
) -> Result<f64> {
    if !cube.contains(x) || c.len() != x.len() {
        return Err(Error::Domain(format!("point {x:?} lies outside the cube [1/R, R]^n")));
    }
    Ok(density_at(f, &logs_of(x), c) - cube_energy / cube.volume())
}

/// `((1/r) Σ |f(x_j)|² x_j^{2c}, (1/r) Σ |f(x_j)|² x_j^{2c−1})`.
pub fn empirical_frame<F: LogAxisFunction + ?Sized>(f: &F, pts: &SamplePointSet, c: &[f64]) -> (f64, f64) {
    let mut weighted = CompensatedSum::new();
    let mut density = CompensatedSum::new();
    for x in &pts.points {
        let u = logs_of(x);
        let w = f.weighted_log(&u, c).norm_sqr();
        weighted.add(w);
        density.add(w * (-u.iter().sum::<f64>()).exp());
    }
    let r = pts.points.len() as f64;
    (weighted.value() / r, density.value() / r)
}

/// Both readings of the sampling inequality for one function and point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameCheckResult {
    pub empirical_weighted: f64,
    pub empirical_density: f64,
    pub lower_paper: f64,
    pub upper_paper: f64,
    pub lower_sharp: f64,
    pub upper_sharp: f64,
    pub pass_paper: bool,
    pub pass_sharp: bool,
    /// `|density − (1−δ)‖f‖²/vol| <= μ‖f‖²/vol`, the event driving both readings.
    pub event_e: bool,
    pub event_threshold: f64,
}

/// Frame constants `R^{n−1}(1−δ−μ)/(R²−1)^n` and `R^{n+1}(1+μ)/(R²−1)^n` as
/// printed, and the variants `(1−δ−μ)/(R²−1)^n`, `R^{2n}(1+μ)/(R²−1)^n`
/// that bound `Π x(i)` by `R^{±n}`; all scaled by `‖f‖²`.
pub fn check_inequality(
    f: &LatticeFunction,
    pts: &SamplePointSet,
    mu: f64,
    delta_measured: f64,
    cube: &ConcentrationCube,
) -> Result<FrameCheckResult> {
    if !(mu > 0.0 && mu < 1.0 - delta_measured) {
        return Err(Error::invalid(format!("mu must lie in (0, 1 - delta) = (0, {}), got {mu}", 1.0 - delta_measured)));
    }
    if f.params().n() != cube.n() {
        return Err(Error::DimensionMismatch { expected: f.params().n(), got: cube.n() });
    }
    let norm_sq = norm_parseval(f)?.powi(2);
    let n = cube.n() as i32;
    let big_r = cube.big_r();
    let q = (big_r * big_r - 1.0).powi(n);
    let lower_core = (1.0 - delta_measured - mu) / q * norm_sq;
    let upper_core = (1.0 + mu) / q * norm_sq;
    let lower_paper = big_r.powi(n - 1) * lower_core;
    let upper_paper = big_r.powi(n + 1) * upper_core;
    let lower_sharp = lower_core;
    let upper_sharp = big_r.powi(2 * n) * upper_core;

    let (empirical_weighted, empirical_density) = empirical_frame(f, pts, f.params().c());
    let vol = cube.volume();
    let event_threshold = mu * norm_sq / vol;
    let event_e = (empirical_density - (1.0 - delta_measured) * norm_sq / vol).abs() <= event_threshold;
    Ok(FrameCheckResult {
        empirical_weighted,
        empirical_density,
        lower_paper,
        upper_paper,
        lower_sharp,
        upper_sharp,
        pass_paper: lower_paper <= empirical_weighted && empirical_weighted <= upper_paper,
        pass_sharp: lower_sharp <= empirical_weighted && empirical_weighted <= upper_sharp,
        event_e,
        event_threshold,
    })
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Inputs of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n: usize,
    pub c: Vec<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub profile: SynthesisProfile,
    pub mu: f64,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    /// Use one function for every trial instead of a fresh draw per trial.
    #[serde(default)]
    pub reuse_function: bool,
    #[serde(default)]
    pub quad: QuadratureSpec,
    #[serde(default = "default_variant")]
    pub variant: Variant,
}

fn default_variant() -> Variant {
    Variant::Paper
}

impl ExperimentSpec {
    pub fn space(&self) -> Result<SpaceParams> {
        let params = SpaceParams::new(self.c.clone(), self.t)?;
        if params.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: params.n() });
        }
        Ok(params)
    }

    pub fn cube(&self) -> Result<ConcentrationCube> {
        ConcentrationCube::new(self.big_r, self.n)
    }

    pub fn validate(&self) -> Result<()> {
        self.space()?;
        self.cube()?;
        self.profile.validate()?;
        self.quad.validate()?;
        if self.r == 0 || self.trials == 0 {
            return Err(Error::invalid("r and trials must be positive"));
        }
        let ceiling = 1.0 - self.profile.target_delta.unwrap_or(0.0);
        if !(self.mu > 0.0 && self.mu < ceiling) {
            return Err(Error::invalid(format!(
                "mu must lie in (0, 1 - target_delta) = (0, {ceiling}), got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub delta: f64,
    #[serde(flatten)]
    pub check: FrameCheckResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub spec: ExperimentSpec,
    pub trials: usize,
    pub failures_paper: usize,
    pub failures_sharp: usize,
    pub event_e_failures: usize,
    pub failure_rate_ci_paper: (f64, f64),
    pub failure_rate_ci_sharp: (f64, f64),
    /// `log(2β e^{−rα})` for the configured variant.
    pub log_theoretical_bound: f64,
    /// `2β e^{−rα}`, saturating at `f64::MAX`.
    pub theoretical_bound: f64,
    pub vacuous: bool,
    pub records: Vec<TrialRecord>,
}

impl MonteCarloReport {
    pub const CSV_HEADER: &'static str =
        "trial,seed,delta,empirical_weighted,lower_paper,upper_paper,lower_sharp,upper_sharp,pass_paper,pass_sharp";

    /// One row per trial; floats carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for rec in &self.records {
            let c = &rec.check;
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                rec.trial,
                rec.seed,
                rec.delta,
                c.empirical_weighted,
                c.lower_paper,
                c.upper_paper,
                c.lower_sharp,
                c.upper_sharp,
                c.pass_paper,
                c.pass_sharp
            );
        }
        out
    }
}

/// Runs `spec.trials` independent trials in parallel. Trial `i` uses the
/// seed `derive_seed(spec.seed, i)`; its function comes from the profile
/// with seed `derive_seed(profile.seed, i)` (or the profile seed itself when
/// the function is reused) and its points from `derive_seed(trial_seed, 1)`.
pub fn monte_carlo_experiment(spec: &ExperimentSpec) -> Result<MonteCarloReport> {
    spec.validate()?;
    let params = spec.space()?;
    let cube = spec.cube()?;
    let shared = if spec.reuse_function { Some(synthesize(spec, &params, &cube, None)?) } else { None };

    let records: Vec<TrialRecord> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(spec.seed, trial as u64);
            let run = || -> Result<TrialRecord> {
                let (f, delta) = match &shared {
                    Some(s) => s.clone(),
                    None => synthesize(spec, &params, &cube, Some(trial))?,
                };
                let pts = draw_uniform(spec.r, &cube, derive_seed(seed, 1))?;
                let check = check_inequality(&f, &pts, spec.mu, delta, &cube)?;
                Ok(TrialRecord { trial, seed, delta, check })
            };
            run().map_err(|e| Error::Trial { trial, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;

    let failures_paper = records.iter().filter(|r| !r.check.pass_paper).count();
    let failures_sharp = records.iter().filter(|r| !r.check.pass_sharp).count();
    let event_e_failures = records.iter().filter(|r| !r.check.event_e).count();
    let k = main_theorem_constants(spec.mu, spec.t, spec.big_r, spec.n, spec.variant)?;
    let log_theoretical_bound = k.log_failure(spec.r as u64);
    Ok(MonteCarloReport {
        spec: spec.clone(),
        trials: spec.trials,
        failures_paper,
        failures_sharp,
        event_e_failures,
        failure_rate_ci_paper: wilson_interval(failures_paper, spec.trials, Z_975),
        failure_rate_ci_sharp: wilson_interval(failures_sharp, spec.trials, Z_975),
        log_theoretical_bound,
        theoretical_bound: saturating_exp(log_theoretical_bound),
        vacuous: log_theoretical_bound >= 0.0,
        records,
    })
}

fn synthesize(
    spec: &ExperimentSpec,
    params: &SpaceParams,
    cube: &ConcentrationCube,
    trial: Option<usize>,
) -> Result<(LatticeFunction, f64)> {
    let mut profile = spec.profile.clone();
    if let Some(trial) = trial {
        profile.seed = derive_seed(profile.seed, trial as u64);
    }
    let out = random_band_function(params, &profile, Some(cube), &spec.quad)?;
    let delta = match out.report {
        Some(r) => r.delta,
        None => concentration(&out.function, cube, &spec.quad)?.delta,
    };
    Ok((out.function, delta))
}

/// Empirical laws of the `Z_j` for one function and point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZStatistics {
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    /// Unbiased sample variance.
    pub empirical_var: f64,
    /// Standard error of the variance estimate.
    pub var_std_error: f64,
    pub sup_abs: f64,
    /// `max_j |Z_j(f) − Z_j(g)|` for the paired function, if any.
    pub lipschitz_lhs: Option<f64>,
    /// `2R^n` times the probe-grid sup of `x^c |f − g|` on the cube.
    pub lipschitz_rhs: Option<f64>,
}

pub fn z_statistics(
    f: &LatticeFunction,
    pts: &SamplePointSet,
    cube: &ConcentrationCube,
    paired: Option<&LatticeFunction>,
    quad: &QuadratureSpec,
) -> Result<ZStatistics> {
    let c = f.params().c();
    let half_widths = vec![cube.log_r(); cube.n()];
    let energy_f = box_energy(f, &half_widths, quad)?;
    let zf: Vec<f64> = pts.points.iter().map(|x| z_variable(f, x, c, cube, energy_f)).collect::<Result<_>>()?;

    let r = zf.len() as f64;
    let mean = zf.iter().copied().collect::<CompensatedSum>().value() / r;
    let m2 = zf.iter().map(|z| (z - mean).powi(2)).collect::<CompensatedSum>().value();
    let m4 = zf.iter().map(|z| (z - mean).powi(4)).collect::<CompensatedSum>().value() / r;
    let empirical_var = if zf.len() > 1 { m2 / (r - 1.0) } else { 0.0 };
    let var_std_error = ((m4 - (m2 / r).powi(2)).max(0.0) / r).sqrt();
    let sup_abs = zf.iter().fold(0.0f64, |m, z| m.max(z.abs()));

    let (lipschitz_lhs, lipschitz_rhs) = match paired {
        Some(g) => {
            let energy_g = box_energy(g, &half_widths, quad)?;
            let mut lhs: f64 = 0.0;
            for (x, z) in pts.points.iter().zip(&zf) {
                lhs = lhs.max((z - z_variable(g, x, c, cube, energy_g)?).abs());
            }
            let rhs = 2.0 * cube.big_r().powi(cube.n() as i32) * probe_sup_distance(f, g, cube)?;
            (Some(lhs), Some(rhs))
        }
        None => (None, None),
    };
    Ok(ZStatistics {
        mean,
        std_error: (empirical_var / r).sqrt(),
        empirical_var,
        var_std_error,
        sup_abs,
        lipschitz_lhs,
        lipschitz_rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MultiIndex;
    use num_complex::Complex64;

    fn lin0() -> LatticeFunction {
        LatticeFunction::single(SpaceParams::one_dim(0.0, 1.0).unwrap(), MultiIndex(vec![0]), Complex64::new(1.0, 0.0))
            .unwrap()
    }

    #[test]
    fn points_stay_in_cube_and_repeat() {
        let cube = ConcentrationCube::new(3.0, 2).unwrap();
        let a = draw_uniform(500, &cube, 11).unwrap();
        assert!(a.points.iter().all(|x| cube.contains(x)));
        assert_eq!(a, draw_uniform(500, &cube, 11).unwrap());
        assert_ne!(a, draw_uniform(500, &cube, 12).unwrap());
        assert!(draw_uniform(0, &cube, 1).is_err());
    }

    #[test]
    fn frame_of_unit_kernel_at_one() {
        let pts = SamplePointSet { points: vec![vec![1.0]], r: 1, seed: 0, big_r: 2.0 };
        let (w, d) = empirical_frame(&lin0(), &pts, &[0.0]);
        assert!((w - 1.0).abs() < 1e-15 && (d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frame_constants_example() {
        let cube = ConcentrationCube::new(2.0, 1).unwrap();
        let pts = SamplePointSet { points: vec![vec![1.0]], r: 1, seed: 0, big_r: 2.0 };
        let res = check_inequality(&lin0(), &pts, 0.1, 0.1, &cube).unwrap();
        assert!((res.lower_paper - 0.8 / 3.0).abs() < 1e-15);
        assert!((res.upper_paper - 4.4 / 3.0).abs() < 1e-15);
        assert_eq!(res.lower_paper, res.lower_sharp);
        assert_eq!(res.upper_paper, res.upper_sharp);
        assert!(res.pass_paper && res.pass_sharp);
        assert!(check_inequality(&lin0(), &pts, 0.95, 0.1, &cube).is_err());
    }

    #[test]
    fn z_outside_cube_is_rejected() {
        let cube = ConcentrationCube::new(2.0, 1).unwrap();
        assert!(z_variable(&lin0(), &[3.0], &[0.0], &cube, 0.5).is_err());
        let z = z_variable(&lin0(), &[1.0], &[0.0], &cube, 0.75).unwrap();
        assert!((z - (1.0 - 0.75 / 1.5)).abs() < 1e-15);
    }

    #[test]
    fn wilson_interval_properties() {
        let (lo, hi) = wilson_interval(0, 200, Z_975);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.02);
        let (lo, hi) = wilson_interval(50, 100, Z_975);
        assert!((lo + hi - 1.0).abs() < 1e-12 && lo > 0.39 && hi < 0.61);
        assert_eq!(wilson_interval(0, 0, Z_975), (0.0, 1.0));
    }
}
