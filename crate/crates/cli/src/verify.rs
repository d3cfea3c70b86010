use std::path::Path;

use mellin_sampling::rng::CounterStream;
use mellin_sampling::spectral::norm_sq_quadrature_full;
use mellin_sampling::synthesis::probe_sup_distance;
use mellin_sampling::{
    bandlimit_residual, norm_parseval, reproduce_integral, truncate_to_bn, truncation_error_bound, ConcentrationCube,
    IndexWindow, LatticeFunction, QuadratureSpec,
};
use serde::{Deserialize, Serialize};

use crate::config::{to_pretty, VerifyChecks, VerifyConfig};
use crate::error::{CliError, Result};
use crate::{check_version, Artifact, Outcome, Overrides};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// The measured quantity, compared against `threshold` with `<=`.
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub c: Vec<f64>,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub support_size: usize,
    pub norm: f64,
    pub all_pass: bool,
    pub checks: Vec<CheckResult>,
}

pub(crate) fn run(mut cfg: VerifyConfig, base: &Path, overrides: &Overrides) -> Result<Outcome> {
    check_version(cfg.format_version)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if overrides.variant.is_some() {
        return Err(CliError::Config("verify has no bound variant".into()));
    }
    let path = base.join(&cfg.function);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::read(&path, e))?;
    cfg.function = std::path::absolute(&path).map_err(|e| CliError::read(&path, e))?;
    let f = LatticeFunction::from_json(&text)?;

    let report = verify_function(&f, cfg.big_r, cfg.seed, &cfg.checks, &cfg.quad)?;
    let failures: Vec<String> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    let summary = report
        .checks
        .iter()
        .map(|c| {
            format!("{:<22} {}  {:.3e} <= {:.3e}", c.name, if c.pass { "pass" } else { "FAIL" }, c.value, c.threshold)
        })
        .collect();
    Ok(Outcome {
        artifacts: vec![
            Artifact { name: "config.json", contents: to_pretty(&cfg) },
            Artifact { name: "verify.json", contents: to_pretty(&report) },
        ],
        summary,
        failures,
    })
}

/// Runs every check on `f` over the cube `[1/R, R]^n`.
pub fn verify_function(
    f: &LatticeFunction,
    big_r: f64,
    seed: u64,
    checks: &VerifyChecks,
    quad: &QuadratureSpec,
) -> Result<VerifyReport> {
    quad.validate()?;
    let params = f.params();
    let n = params.n();
    let t = params.t();
    let cube = ConcentrationCube::new(big_r, n)?;
    let norm = norm_parseval(f)?;
    // sup |x^c f(x)| <= T^{n/2} ||f|| on the lattice span
    let kernel_bound = t.powf(n as f64 / 2.0) * norm;
    let radius = f.support_radius() as f64;
    let mut results = Vec::new();

    let mut interp: f64 = 0.0;
    for (k, v) in f.coeffs() {
        let x: Vec<f64> = k.0.iter().map(|&ki| (ki as f64 / t).exp()).collect();
        interp = interp.max((f.eval(&x)? - v).norm() / v.norm().max(1.0));
    }
    results.push(check("interpolation", interp, checks.interpolation_tol));

    let quad_norm_sq = norm_sq_quadrature_full(f, checks.parseval_margin_steps, quad)?;
    let parseval = if norm == 0.0 { quad_norm_sq.abs() } else { (quad_norm_sq - norm * norm).abs() / (norm * norm) };
    results.push(check("parseval", parseval, checks.parseval_tol));

    let mut stream = CounterStream::new(seed, 0);
    let span = (radius + 20.0) / t;
    let mut sup_ratio: f64 = 0.0;
    for _ in 0..checks.reproducing_points {
        let u: Vec<f64> = (0..n).map(|_| span * (2.0 * stream.next_f64() - 1.0)).collect();
        let v = f.eval_weighted_log(&u, &IndexWindow::All).norm();
        if kernel_bound > 0.0 {
            sup_ratio = sup_ratio.max(v / kernel_bound);
        } else {
            sup_ratio = sup_ratio.max(v);
        }
    }
    let threshold = if kernel_bound > 0.0 { 1.0 + checks.reproducing_tol } else { 0.0 };
    results.push(check("reproducing_bound", sup_ratio, threshold));

    let integral_quad = quad.clone().with_log_radius(checks.integral_margin_steps / t);
    let mut stream = CounterStream::new(seed, 1);
    let near = (radius + 5.0) / t;
    let mut integral: f64 = 0.0;
    for _ in 0..checks.integral_points {
        let u: Vec<f64> = (0..n).map(|_| near * (2.0 * stream.next_f64() - 1.0)).collect();
        let x: Vec<f64> = u.iter().map(|v| v.exp()).collect();
        let weight = params.c_dot(&u).exp();
        let diff = (reproduce_integral(f, &x, &integral_quad)? - f.eval(&x)?).norm() * weight;
        integral = integral.max(if kernel_bound > 0.0 { diff / kernel_bound } else { diff });
    }
    results.push(check("reproducing_integral", integral, if kernel_bound > 0.0 { checks.integral_tol } else { 0.0 }));

    let orders = if checks.truncation_n.is_empty() {
        truncation_orders(2.0 * t * cube.log_r(), f.support_radius())
    } else {
        checks.truncation_n.clone()
    };
    let mut worst: f64 = 0.0;
    for &big_n in &orders {
        let bound = truncation_error_bound(big_n, params, &cube, norm);
        let err = probe_sup_distance(f, &truncate_to_bn(f, big_n), &cube)?;
        let excess = if bound.is_infinite() {
            0.0
        } else if bound > 0.0 {
            err / bound
        } else if err > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(excess);
    }
    results.push(check("truncation", worst, 1.0));

    let residual = bandlimit_residual(f, params, std::f64::consts::PI * t, quad)?;
    results.push(check("bandlimit", residual, checks.bandlimit_tol));

    Ok(VerifyReport {
        n,
        t,
        c: params.c().to_vec(),
        big_r,
        support_size: f.coeffs().len(),
        norm,
        all_pass: results.iter().all(|c| c.pass),
        checks: results,
    })
}

fn check(name: &str, value: f64, threshold: f64) -> CheckResult {
    CheckResult { name: name.to_string(), pass: value <= threshold, value, threshold }
}

/// Eight orders from the first `N > 2T log R` up to where truncation stops
/// changing the function.
fn truncation_orders(floor: f64, radius: u64) -> Vec<u64> {
    let first = floor.floor() as u64 + 1;
    let last = first.max(2 * radius + 2);
    let mut out: Vec<u64> = (0..8).map(|i| first + (last - first) * i / 7).collect();
    out.dedup();
    out
}
