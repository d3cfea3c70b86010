use mellin_sampling::{random_band_function, ConcentrationCube, SpaceParams};
use serde::Serialize;

use crate::config::{to_pretty, SynthConfig};
use crate::error::{CliError, Result};
use crate::{check_version, Artifact, Outcome, Overrides};

#[derive(Serialize)]
struct SynthReport {
    delta: f64,
    norm: f64,
    cube_energy: f64,
    total_norm_sq: f64,
    support_size: usize,
    attempts: usize,
    #[serde(rename = "R")]
    big_r: f64,
}

pub(crate) fn run(mut cfg: SynthConfig, overrides: &Overrides) -> Result<Outcome> {
    check_version(cfg.format_version)?;
    if let Some(seed) = overrides.seed {
        cfg.profile.seed = seed;
    }
    if overrides.variant.is_some() {
        return Err(CliError::Config("synth has no bound variant".into()));
    }
    let params = SpaceParams::new(cfg.c.clone(), cfg.t)?;
    let cube = ConcentrationCube::new(cfg.big_r, params.n())?;
    let out = random_band_function(&params, &cfg.profile, Some(&cube), &cfg.quad)?;
    let report = out.report.expect("a cube was supplied");

    let summary = SynthReport {
        delta: report.delta,
        norm: report.total_norm_sq.sqrt(),
        cube_energy: report.cube_energy,
        total_norm_sq: report.total_norm_sq,
        support_size: out.function.coeffs().len(),
        attempts: out.attempts,
        big_r: cfg.big_r,
    };
    let mut function = out.function.to_json()?;
    function.push('\n');
    Ok(Outcome {
        summary: vec![
            format!("delta = {:.6e}", summary.delta),
            format!("norm = {:.6e}", summary.norm),
            format!("support size = {}", summary.support_size),
            format!("draws = {}", summary.attempts),
        ],
        artifacts: vec![
            Artifact { name: "config.json", contents: to_pretty(&cfg) },
            Artifact { name: "function.json", contents: function },
            Artifact { name: "concentration.json", contents: to_pretty(&summary) },
        ],
        failures: Vec::new(),
    })
}
