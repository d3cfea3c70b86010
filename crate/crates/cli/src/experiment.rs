use mellin_sampling::bounds::{main_theorem_constants, saturating_exp, Variant};
use mellin_sampling::monte_carlo_experiment;
use serde::Serialize;

use crate::config::{to_pretty, ExperimentConfig};
use crate::error::Result;
use crate::{check_version, single_variant, Artifact, Outcome, Overrides};

#[derive(Serialize)]
struct TheoreticalBound {
    variant: Variant,
    log_bound: f64,
    bound: f64,
    vacuous: bool,
}

#[derive(Serialize)]
struct ExperimentSummary {
    trials: usize,
    r: usize,
    failures_paper: usize,
    failures_sharp: usize,
    event_e_failures: usize,
    failure_rate_paper: f64,
    failure_rate_sharp: f64,
    failure_rate_ci_paper: (f64, f64),
    failure_rate_ci_sharp: (f64, f64),
    theoretical: Vec<TheoreticalBound>,
}

pub(crate) fn run(mut cfg: ExperimentConfig, overrides: &Overrides) -> Result<Outcome> {
    check_version(cfg.format_version)?;
    if let Some(seed) = overrides.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(choice) = overrides.variant {
        if let Some(v) = single_variant(choice) {
            cfg.experiment.variant = v;
        }
        cfg.report_variants = Some(choice);
    }
    let spec = &cfg.experiment;
    let report = monte_carlo_experiment(spec)?;

    let variants = cfg.report_variants.map_or_else(|| vec![spec.variant], |c| c.variants());
    let theoretical = variants
        .into_iter()
        .map(|variant| {
            let k = main_theorem_constants(spec.mu, spec.t, spec.big_r, spec.n, variant)?;
            let log_bound = k.log_failure(spec.r as u64);
            Ok(TheoreticalBound { variant, log_bound, bound: saturating_exp(log_bound), vacuous: log_bound >= 0.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    let trials = report.trials as f64;
    let summary = ExperimentSummary {
        trials: report.trials,
        r: spec.r,
        failures_paper: report.failures_paper,
        failures_sharp: report.failures_sharp,
        event_e_failures: report.event_e_failures,
        failure_rate_paper: report.failures_paper as f64 / trials,
        failure_rate_sharp: report.failures_sharp as f64 / trials,
        failure_rate_ci_paper: report.failure_rate_ci_paper,
        failure_rate_ci_sharp: report.failure_rate_ci_sharp,
        theoretical,
    };

    let mut lines = vec![
        format!("trials = {}, r = {}", summary.trials, summary.r),
        format!(
            "failure rate (paper constants) = {:.4} [{:.4}, {:.4}]",
            summary.failure_rate_paper, summary.failure_rate_ci_paper.0, summary.failure_rate_ci_paper.1
        ),
        format!(
            "failure rate (sharp constants) = {:.4} [{:.4}, {:.4}]",
            summary.failure_rate_sharp, summary.failure_rate_ci_sharp.0, summary.failure_rate_ci_sharp.1
        ),
    ];
    for b in &summary.theoretical {
        lines.push(format!(
            "theoretical bound ({}) = exp({:.6e}){}",
            b.variant,
            b.log_bound,
            if b.vacuous { "  [vacuous]" } else { "" }
        ));
    }

    Ok(Outcome {
        artifacts: vec![
            Artifact { name: "config.json", contents: to_pretty(&cfg) },
            Artifact { name: "experiment.json", contents: to_pretty(&report) },
            Artifact { name: "trials.csv", contents: report.to_csv() },
            Artifact { name: "summary.json", contents: to_pretty(&summary) },
        ],
        summary: lines,
        failures: Vec::new(),
    })
}
