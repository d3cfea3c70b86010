#![allow(dead_code)]

use mellin_sampling::synthesis::{random_band_function, Decay, SynthesisProfile};
use mellin_sampling::{LatticeFunction, QuadratureSpec, SpaceParams};
use serde_json::Value;

pub fn vectors() -> Value {
    let text = include_str!("../fixtures/vectors.json");
    serde_json::from_str(text).expect("fixture parses")
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(f64::MIN_POSITIVE)
}

pub fn f64_of(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

/// Unit-norm random function with flat decay on `[-k, k]^n`.
pub fn random_unit(params: &SpaceParams, k: u32, seed: u64) -> LatticeFunction {
    let profile =
        SynthesisProfile { seed, support_half_width: k, decay: Decay::Flat, target_delta: None, max_rejections: 1 };
    random_band_function(params, &profile, None, &QuadratureSpec::default()).unwrap().function
}
