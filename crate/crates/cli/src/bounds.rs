use std::fmt::Write as _;

use mellin_sampling::bounds::{evaluate, BoundOutputs};

use crate::config::{to_pretty, BoundsConfig};
use crate::error::{CliError, Result};
use crate::{check_version, Artifact, Outcome, Overrides};

pub const BOUNDS_CSV_HEADER: &str = "variant,n,T,R,epsilon,mu,r,target_failure,d_eps,log_covering,log_prob_est,alpha,\
log_beta,log_failure_bound,failure_bound_raw,failure_bound_clamped,vacuous,min_r,crude_r";

pub(crate) fn run(mut cfg: BoundsConfig, overrides: &Overrides) -> Result<Outcome> {
    check_version(cfg.format_version)?;
    if overrides.seed.is_some() {
        return Err(CliError::Config("bounds takes no seed".into()));
    }
    if let Some(choice) = overrides.variant {
        cfg.variants = choice;
    }
    let points: Vec<_> = cfg.grid.points().into_iter().chain(cfg.points.iter().cloned()).collect();
    let mut rows = Vec::with_capacity(points.len() * 2);
    for p in &points {
        for v in cfg.variants.variants() {
            rows.push(evaluate(p, v)?);
        }
    }
    let vacuous = rows.iter().filter(|r| r.vacuous).count();
    Ok(Outcome {
        summary: vec![format!("{} rows from {} points, {} vacuous", rows.len(), points.len(), vacuous)],
        artifacts: vec![
            Artifact { name: "config.json", contents: to_pretty(&cfg) },
            Artifact { name: "bounds.json", contents: to_pretty(&rows) },
            Artifact { name: "bounds.csv", contents: bounds_csv(&rows) },
        ],
        failures: Vec::new(),
    })
}

/// One row per evaluation; floats carry 17 significant digits and absent
/// optional values are empty fields.
pub fn bounds_csv(rows: &[BoundOutputs]) -> String {
    let mut out = String::from(BOUNDS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let i = &r.inputs;
        let opt_f = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let opt_u = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            r.variant,
            i.n,
            i.t,
            i.big_r,
            i.epsilon,
            i.mu,
            i.r,
            opt_f(i.target_failure),
            r.d_eps,
            r.log_covering,
            r.log_prob_est,
            r.alpha,
            r.log_beta,
            r.log_failure_bound,
            r.failure_bound_raw,
            r.failure_bound_clamped,
            r.vacuous,
            opt_u(r.min_r),
            opt_u(r.crude_r),
        );
    }
    out
}
