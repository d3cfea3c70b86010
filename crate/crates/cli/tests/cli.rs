use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mellin_sampler_cli::{run, Command as Cmd, Overrides, VariantChoice, BOUNDS_CSV_HEADER};
use mellin_sampling::bounds::{evaluate, BoundInputs, Variant};
use mellin_sampling::{LatticeFunction, SpaceParams};
use serde_json::{json, Value};

fn bin(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mellin-sampler"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&out.stderr)))
}

fn synth_config(target_delta: f64, max_rejections: usize) -> Value {
    json!({
        "format_version": 1,
        "c": [0.25],
        "T": 4.0,
        "R": std::f64::consts::E,
        "profile": {
            "seed": 7,
            "support_half_width": 4,
            "decay": { "kind": "flat" },
            "target_delta": target_delta,
            "max_rejections": max_rejections
        }
    })
}

#[test]
fn synth_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "synth.json", &synth_config(0.2, 200));
    let a = run(Cmd::Synth, &cfg, &Overrides::default()).unwrap();
    let b = run(Cmd::Synth, &cfg, &Overrides::default()).unwrap();
    assert_eq!(a, b);

    let text = a.artifact("function.json").unwrap();
    let f = LatticeFunction::from_json(text).unwrap();
    assert_eq!(f.to_json().unwrap(), LatticeFunction::from_json(&f.to_json().unwrap()).unwrap().to_json().unwrap());
    let conc: Value = serde_json::from_str(a.artifact("concentration.json").unwrap()).unwrap();
    assert!(conc["delta"].as_f64().unwrap() <= 0.2);

    let other = run(Cmd::Synth, &cfg, &Overrides { seed: Some(8), variant: None }).unwrap();
    assert_ne!(other.artifact("function.json"), a.artifact("function.json"));
}

#[test]
fn unreachable_concentration_target_exhausts_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "synth.json", &synth_config(1e-9, 3));
    let out = bin(&["synth"], &cfg, &dir.path().join("out"));
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(stderr_json(&out)["code"], "rejection-exhausted");
}

#[test]
fn synthesized_function_passes_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "synth.json", &synth_config(0.2, 200));
    let out = bin(&["synth"], &cfg, &dir.path().join("synth"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let verify = json!({ "format_version": 1, "function": "synth/function.json", "R": std::f64::consts::E, "seed": 3 });
    let vcfg = write(dir.path(), "verify.json", &verify);
    let outcome = run(Cmd::Verify, &vcfg, &Overrides::default()).unwrap();
    assert!(outcome.failures.is_empty(), "{:?}", outcome.summary);
    let report: Value = serde_json::from_str(outcome.artifact("verify.json").unwrap()).unwrap();
    assert_eq!(report["all_pass"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 6);
}

#[test]
fn zero_function_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let zero = LatticeFunction::zero(SpaceParams::one_dim(0.1, 2.0).unwrap());
    std::fs::write(dir.path().join("zero.json"), zero.to_json().unwrap()).unwrap();
    let cfg =
        write(dir.path(), "verify.json", &json!({ "format_version": 1, "function": "zero.json", "R": 2.0, "seed": 1 }));
    let outcome = run(Cmd::Verify, &cfg, &Overrides::default()).unwrap();
    assert!(outcome.failures.is_empty(), "{:?}", outcome.summary);
}

#[test]
fn corrupted_function_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{ \"params\": [1, 2").unwrap();
    let cfg =
        write(dir.path(), "verify.json", &json!({ "format_version": 1, "function": "bad.json", "R": 2.0, "seed": 1 }));
    let out = bin(&["verify"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["code"], "parse");
}

#[test]
fn missing_function_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write(dir.path(), "verify.json", &json!({ "format_version": 1, "function": "nope.json", "R": 2.0, "seed": 1 }));
    let out = bin(&["verify"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["code"], "io");
}

#[test]
fn single_trial_experiment_echoes_its_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = json!({
        "n": 1,
        "c": [0.25],
        "T": 4.0,
        "R": std::f64::consts::E,
        "profile": { "seed": 17, "support_half_width": 4, "decay": { "kind": "flat" }, "target_delta": 0.2, "max_rejections": 200 },
        "mu": 0.5,
        "r": 100,
        "trials": 1,
        "seed": 5
    });
    let cfg = write(dir.path(), "experiment.json", &json!({ "format_version": 1, "experiment": spec }));
    let outcome = run(Cmd::Experiment, &cfg, &Overrides::default()).unwrap();
    let report: Value = serde_json::from_str(outcome.artifact("experiment.json").unwrap()).unwrap();
    for key in ["n", "c", "T", "R", "mu", "r", "trials", "seed", "profile"] {
        assert_eq!(report["spec"][key], spec[key], "{key}");
    }
    let csv = outcome.artifact("trials.csv").unwrap();
    assert_eq!(csv.lines().count(), 2);

    let corrected =
        run(Cmd::Experiment, &cfg, &Overrides { seed: None, variant: Some(VariantChoice::Corrected) }).unwrap();
    let summary: Value = serde_json::from_str(corrected.artifact("summary.json").unwrap()).unwrap();
    let variants: Vec<&str> =
        summary["theoretical"].as_array().unwrap().iter().map(|t| t["variant"].as_str().unwrap()).collect();
    assert_eq!(variants, ["corrected"]);
}

#[test]
fn empty_bounds_grid_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bounds.json", &json!({ "format_version": 1 }));
    let outcome = run(Cmd::Bounds, &cfg, &Overrides::default()).unwrap();
    assert_eq!(outcome.artifact("bounds.csv").unwrap(), format!("{BOUNDS_CSV_HEADER}\n"));
    assert_eq!(outcome.artifact("bounds.json").unwrap().trim(), "[]");
}

#[test]
fn bounds_rows_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let point = BoundInputs { n: 1, t: 2.0, big_r: 1.5, epsilon: 0.2, mu: 0.3, r: 100_000, target_failure: Some(0.05) };
    let cfg = write(dir.path(), "bounds.json", &json!({ "format_version": 1, "points": [point] }));
    let outcome = run(Cmd::Bounds, &cfg, &Overrides::default()).unwrap();
    let rows: Vec<Value> = serde_json::from_str(outcome.artifact("bounds.json").unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    for (row, v) in rows.iter().zip(Variant::ALL) {
        assert_eq!(row, &serde_json::to_value(evaluate(&point, v).unwrap()).unwrap());
    }
    let csv = outcome.artifact("bounds.csv").unwrap();
    let header: Vec<&str> = BOUNDS_CSV_HEADER.split(',').collect();
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), header.len());
        assert!(["paper", "corrected"].contains(&fields[0]), "{line}");
        let d_eps: f64 = fields[header.iter().position(|h| *h == "d_eps").unwrap()].parse().unwrap();
        assert!(d_eps > 0.0);
    }

    let paper = run(Cmd::Bounds, &cfg, &Overrides { seed: None, variant: Some(VariantChoice::Paper) }).unwrap();
    assert_eq!(paper.artifact("bounds.csv").unwrap().lines().count(), 2);
}

#[test]
fn malformed_configs_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut unknown = synth_config(0.2, 10);
    unknown["colour"] = json!("blue");
    let mut missing = synth_config(0.2, 10);
    missing.as_object_mut().unwrap().remove("format_version");
    let mut future = synth_config(0.2, 10);
    future["format_version"] = json!(2);
    for (name, cfg) in [("unknown", unknown), ("missing", missing), ("future", future)] {
        let path = write(dir.path(), &format!("{name}.json"), &cfg);
        let out = bin(&["synth"], &path, &dir.path().join(name));
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert_eq!(stderr_json(&out)["code"], "config", "{name}");
    }
}

#[test]
fn meaningless_overrides_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bounds.json", &json!({ "format_version": 1 }));
    let out = bin(&["bounds", "--seed", "3"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let cfg = write(dir.path(), "synth.json", &synth_config(0.2, 10));
    let out = bin(&["synth", "--variant", "paper"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_parameters_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synth_config(0.2, 10);
    cfg["T"] = json!(-1.0);
    let path = write(dir.path(), "synth.json", &cfg);
    let out = bin(&["synth"], &path, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["code"], "invalid-parameter");
}
