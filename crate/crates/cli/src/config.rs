//! Run configurations. Every file carries `format_version`; unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use mellin_sampling::bounds::{BoundInputs, Variant};
use mellin_sampling::{ExperimentSpec, QuadratureSpec, SynthesisProfile};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Which constant variants a command reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantChoice {
    Paper,
    Corrected,
    Both,
}

impl VariantChoice {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            VariantChoice::Paper => vec![Variant::Paper],
            VariantChoice::Corrected => vec![Variant::Corrected],
            VariantChoice::Both => Variant::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub format_version: u32,
    pub c: Vec<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub profile: SynthesisProfile,
    #[serde(default)]
    pub quad: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub format_version: u32,
    /// Function file; relative paths are resolved against the config file.
    pub function: PathBuf,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// Seed for the random evaluation points.
    pub seed: u64,
    #[serde(default)]
    pub checks: VerifyChecks,
    #[serde(default)]
    pub quad: QuadratureSpec,
}

/// Tolerances and sizes of the verification checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyChecks {
    pub interpolation_tol: f64,
    pub parseval_tol: f64,
    /// Lattice steps of quadrature window on each side of the support; the
    /// integral outside the window is added in closed form.
    pub parseval_margin_steps: f64,
    pub reproducing_points: usize,
    pub reproducing_tol: f64,
    pub integral_points: usize,
    pub integral_tol: f64,
    /// Lattice steps of kernel window around the support for the reproducing integral.
    pub integral_margin_steps: f64,
    /// Truncation orders `N`; empty picks eight orders above `2T log R`.
    pub truncation_n: Vec<u64>,
    pub bandlimit_tol: f64,
}

impl Default for VerifyChecks {
    fn default() -> Self {
        Self {
            interpolation_tol: 1e-12,
            parseval_tol: 2e-3,
            parseval_margin_steps: 30.0,
            reproducing_points: 1000,
            reproducing_tol: 1e-6,
            integral_points: 5,
            integral_tol: 1e-3,
            integral_margin_steps: 1000.0,
            truncation_n: Vec::new(),
            bandlimit_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format_version: u32,
    pub experiment: ExperimentSpec,
    /// Variants whose theoretical bound goes into the summary; defaults to
    /// the experiment's own variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_variants: Option<VariantChoice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub format_version: u32,
    #[serde(default)]
    pub grid: BoundsGrid,
    /// Extra points evaluated after the grid.
    #[serde(default)]
    pub points: Vec<BoundInputs>,
    #[serde(default = "both")]
    pub variants: VariantChoice,
}

fn both() -> VariantChoice {
    VariantChoice::Both
}

/// Cartesian grid; an empty axis makes the grid empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsGrid {
    pub n: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    #[serde(rename = "R")]
    pub big_r: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub mu: Vec<f64>,
    pub r: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_failure: Option<f64>,
}

impl BoundsGrid {
    /// Points in row-major order over `n, T, R, epsilon, mu, r`.
    pub fn points(&self) -> Vec<BoundInputs> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &t in &self.t {
                for &big_r in &self.big_r {
                    for &epsilon in &self.epsilon {
                        for &mu in &self.mu {
                            for &r in &self.r {
                                out.push(BoundInputs {
                                    n,
                                    t,
                                    big_r,
                                    epsilon,
                                    mu,
                                    r,
                                    target_failure: self.target_failure,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Reads a config, checking `format_version` before the remaining fields.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => return Err(CliError::Config(format!("unsupported format_version {v}, expected {FORMAT_VERSION}"))),
        None => return Err(CliError::Config("missing integer format_version".into())),
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("config types always serialize");
    text.push('\n');
    text
}
