//! Closed-form constants and probability bounds: the dimension and covering
//! bounds for the truncated space, the Bernstein tail, the failure bound for
//! a fixed accuracy `ε`, the sampling-inequality constants `α` and `β`, and
//! the smallest sample size that makes the failure bound useful.
//!
//! All probabilities are produced in log space first; `β` alone overflows
//! `f64` for most parameters of interest.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which reading of the dimension bound to use.
///
/// `Paper` keeps the factor `2^{n(n/2+2)}` as printed; `Corrected` uses
/// `2^{2n+2}`, the value obtained by targeting accuracy `ε/2` in the
/// truncation estimate. The two agree at `n = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Paper,
    Corrected,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Paper, Variant::Corrected];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Paper => "paper",
            Variant::Corrected => "corrected",
        }
    }

    /// `log` of the power of two multiplying `T^n π^{-2n} ε^{-2}`.
    fn log_two_factor(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Variant::Paper => LN_2 * n * (n / 2.0 + 2.0),
            Variant::Corrected => LN_2 * (2.0 * n + 2.0),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Variant::Paper),
            "corrected" => Ok(Variant::Corrected),
            other => Err(Error::invalid(format!("unknown variant {other:?}"))),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn check_space(n: usize, t: f64, big_r: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    positive("T", t)?;
    if !(big_r.is_finite() && big_r > 1.0) {
        return Err(Error::invalid(format!("R must exceed 1, got {big_r}")));
    }
    Ok(())
}

/// `2·exp(−λ² / (2rσ² + (2/3)Mλ))`. Values at or above 1 carry no information.
pub fn bernstein_tail(lambda: f64, r: u64, sigma_sq: f64, m: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("M", m)?;
    if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
        return Err(Error::invalid("sigma^2 must be nonnegative"));
    }
    if r == 0 {
        return Err(Error::invalid("r must be positive"));
    }
    let denom = 2.0 * r as f64 * sigma_sq + 2.0 / 3.0 * m * lambda;
    Ok(2.0 * (-lambda * lambda / denom).exp())
}

/// `d_ε = 2^n [T^n 2^{(·)} π^{−2n} ε^{−2} + (2T log R + 1)^n]`.
pub fn dimension_bound(epsilon: f64, t: f64, big_r: f64, n: usize, variant: Variant) -> Result<f64> {
    positive("epsilon", epsilon)?;
    check_space(n, t, big_r)?;
    Ok(dimension_core(t, big_r, n, variant, epsilon * epsilon))
}

/// `2^n [T^n 2^{(·)} π^{−2n} / s + (2T log R + 1)^n]`
fn dimension_core(t: f64, big_r: f64, n: usize, variant: Variant, s: f64) -> f64 {
    let ni = n as i32;
    let lead = t.powi(ni) * variant.log_two_factor(n).exp() * PI.powi(-2 * ni) / s;
    let lattice = (2.0 * t * big_r.ln() + 1.0).powi(ni);
    2f64.powi(ni) * (lead + lattice)
}

/// `d_ε · log(16/ε)`, the log of the covering-number bound; 0 once `ε >= 16`.
pub fn covering_log_bound(epsilon: f64, t: f64, big_r: f64, n: usize, variant: Variant) -> Result<f64> {
    let d = dimension_bound(epsilon, t, big_r, n, variant)?;
    if epsilon >= 16.0 {
        return Ok(0.0);
    }
    Ok(d * (16.0 / epsilon).ln())
}

/// Coefficient of `r` in the exponent of the fixed-accuracy failure bound:
/// `3ε²(R²−1)^n / (4R^n (6R^n + ε(R²−1)^n))`.
pub fn failure_rate_coefficient(epsilon: f64, big_r: f64, n: usize) -> f64 {
    let ni = n as i32;
    let q = (big_r * big_r - 1.0).powi(ni);
    let rn = big_r.powi(ni);
    3.0 * epsilon * epsilon * q / (4.0 * rn * (6.0 * rn + epsilon * q))
}

/// Log of the failure bound for accuracy `ε` with `r` samples.
pub fn prob_est_failure_log_bound(epsilon: f64, r: u64, t: f64, big_r: f64, n: usize, variant: Variant) -> Result<f64> {
    positive("epsilon", epsilon)?;
    check_space(n, t, big_r)?;
    if r == 0 {
        return Err(Error::invalid("r must be positive"));
    }
    let ni = n as i32;
    let rn = big_r.powi(ni);
    let s = epsilon * epsilon / (16.0 * rn * rn);
    let covering = dimension_core(t, big_r, n, variant, s) * (64.0 * rn / epsilon).ln();
    Ok(LN_2 + covering - r as f64 * failure_rate_coefficient(epsilon, big_r, n))
}

/// The failure bound itself; `+∞` when it exceeds the `f64` range.
pub fn prob_est_failure_bound(epsilon: f64, r: u64, t: f64, big_r: f64, n: usize, variant: Variant) -> Result<f64> {
    Ok(prob_est_failure_log_bound(epsilon, r, t, big_r, n, variant)?.exp())
}

/// `α` and `log β` of the sampling inequality for tolerance `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub alpha: f64,
    pub log_beta: f64,
}

impl TheoremConstants {
    /// `log(2β e^{−rα})`
    pub fn log_failure(&self, r: u64) -> f64 {
        LN_2 + self.log_beta - r as f64 * self.alpha
    }
}

/// `α = 3μ² / (4(R²−1)^n (6+μ))` and
/// `log β = 2^n [16 T^n π^{−2n} (R²−1)^{2n} 2^{(·)} / μ² + (2T log R + 1)^n] · log(64 (R²−1)^n / μ)`.
pub fn main_theorem_constants(mu: f64, t: f64, big_r: f64, n: usize, variant: Variant) -> Result<TheoremConstants> {
    positive("mu", mu)?;
    check_space(n, t, big_r)?;
    let q = (big_r * big_r - 1.0).powi(n as i32);
    let alpha = 3.0 * mu * mu / (4.0 * q * (6.0 + mu));
    let s = mu * mu / (16.0 * q * q);
    let log_beta = dimension_core(t, big_r, n, variant, s) * (64.0 * q / mu).ln();
    Ok(TheoremConstants { alpha, log_beta })
}

/// Sample sizes for a target failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinSamples {
    /// Least `r` with `2β e^{−rα} <= target`.
    pub min_r: u64,
    /// `⌈log β / α⌉ + 1`, the coarser threshold `r > log β / α`.
    pub crude_r: u64,
}

pub fn min_samples(mu: f64, t: f64, big_r: f64, n: usize, target_failure: f64, variant: Variant) -> Result<MinSamples> {
    if !(target_failure > 0.0 && target_failure < 1.0) {
        return Err(Error::invalid(format!("target failure probability must lie in (0, 1), got {target_failure}")));
    }
    let k = main_theorem_constants(mu, t, big_r, n, variant)?;
    let log_target = target_failure.ln();
    let estimate = ((k.log_beta + (2.0 / target_failure).ln()) / k.alpha).ceil();
    if !(estimate.is_finite() && estimate < u64::MAX as f64) {
        return Err(Error::Overflow(format!("required sample size {estimate:e} does not fit in 64 bits")));
    }
    let mut r = (estimate as u64).max(1);
    while r > 1 && k.log_failure(r - 1) <= log_target {
        r -= 1;
    }
    while k.log_failure(r) > log_target {
        r += 1;
    }
    let crude_r = (k.log_beta / k.alpha).ceil().max(0.0) as u64 + 1;
    Ok(MinSamples { min_r: r, crude_r })
}

/// Parameters for a full evaluation of every bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub r: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_failure: Option<f64>,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        check_space(self.n, self.t, self.big_r)?;
        positive("epsilon", self.epsilon)?;
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::invalid(format!("mu must lie in (0, 1), got {}", self.mu)));
        }
        if self.r == 0 {
            return Err(Error::invalid("r must be positive"));
        }
        if let Some(p) = self.target_failure {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::invalid(format!("target failure probability must lie in (0, 1), got {p}")));
            }
        }
        Ok(())
    }
}

/// Every bound for one parameter point and one variant.
///
/// Probabilities are given as logs and as plain numbers; the raw value
/// saturates at `f64::MAX` so it stays representable in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundOutputs {
    pub inputs: BoundInputs,
    pub variant: Variant,
    pub d_eps: f64,
    pub log_covering: f64,
    pub log_prob_est: f64,
    pub alpha: f64,
    pub log_beta: f64,
    pub log_failure_bound: f64,
    pub failure_bound_raw: f64,
    pub failure_bound_clamped: f64,
    pub vacuous: bool,
    pub min_r: Option<u64>,
    pub crude_r: Option<u64>,
}

pub fn evaluate(inputs: &BoundInputs, variant: Variant) -> Result<BoundOutputs> {
    inputs.validate()?;
    let BoundInputs { n, t, big_r, epsilon, mu, r, target_failure } = *inputs;
    let d_eps = dimension_bound(epsilon, t, big_r, n, variant)?;
    let log_covering = covering_log_bound(epsilon, t, big_r, n, variant)?;
    let log_prob_est = prob_est_failure_log_bound(epsilon, r, t, big_r, n, variant)?;
    let k = main_theorem_constants(mu, t, big_r, n, variant)?;
    let log_failure_bound = k.log_failure(r);
    let failure_bound_raw = saturating_exp(log_failure_bound);
    let samples = target_failure.map(|p| min_samples(mu, t, big_r, n, p, variant)).transpose()?;
    Ok(BoundOutputs {
        inputs: inputs.clone(),
        variant,
        d_eps,
        log_covering,
        log_prob_est,
        alpha: k.alpha,
        log_beta: k.log_beta,
        log_failure_bound,
        failure_bound_raw,
        failure_bound_clamped: failure_bound_raw.min(1.0),
        vacuous: log_failure_bound >= 0.0,
        min_r: samples.map(|s| s.min_r),
        crude_r: samples.map(|s| s.crude_r),
    })
}

/// `exp(x)`, saturating at `f64::MAX` instead of overflowing.
pub fn saturating_exp(x: f64) -> f64 {
    let v = x.exp();
    if v.is_infinite() {
        f64::MAX
    } else {
        v
    }
}
