//! Invariants checked on generated inputs.

mod common;

use common::random_unit;
use mellin_sampling::bounds::{
    covering_log_bound, dimension_bound, main_theorem_constants, min_samples, prob_est_failure_bound,
    prob_est_failure_log_bound, Variant,
};
use mellin_sampling::sampling::{draw_uniform, empirical_frame};
use mellin_sampling::synthesis::{
    min_n_for_error, norm_parseval, probe_sup_distance, truncate_to_bn, truncation_error_bound, ConcentrationCube,
};
use mellin_sampling::{lin_c, sinc_nd, IndexWindow, LatticeFunction, SpaceParams};
use proptest::prelude::*;

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Paper), Just(Variant::Corrected)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn sinc_is_even_and_bounded(x in prop::collection::vec(-50.0f64..50.0, 1..4)) {
        let v = sinc_nd(&x);
        prop_assert!(v.abs() <= 1.0);
        let flipped: Vec<f64> = x.iter().map(|a| -a).collect();
        prop_assert_eq!(v, sinc_nd(&flipped));
        if x.iter().any(|&a| a != 0.0) {
            prop_assert!(v.abs() < 1.0);
        }
    }

    #[test]
    fn unweighted_lin_is_inversion_invariant(u in prop::collection::vec(-8.0f64..8.0, 1..3)) {
        let c = vec![0.0; u.len()];
        let x: Vec<f64> = u.iter().map(|v| v.exp()).collect();
        let inv: Vec<f64> = u.iter().map(|v| (-v).exp()).collect();
        let a = lin_c(&c, &x).unwrap();
        let b = lin_c(&c, &inv).unwrap();
        prop_assert!((a - b).abs() <= 1e-14);
    }

    #[test]
    fn series_interpolates_its_samples(seed in any::<u64>(), t in prop::sample::select(vec![1.0, 2.0, 4.0]), c in -1.0f64..1.0) {
        let params = SpaceParams::one_dim(c, t).unwrap();
        let f = random_unit(&params, 8, seed);
        for (k, v) in f.coeffs() {
            let x = [(k.0[0] as f64 / t).exp()];
            let got = f.eval(&x).unwrap();
            prop_assert!((got - v).norm() <= 1e-12 * v.norm().max(1.0), "k={} got {} want {}", k, got, v);
        }
    }

    #[test]
    fn truncation_never_increases_norm(seed in any::<u64>(), big_n in 0u64..30) {
        let params = SpaceParams::new(vec![0.2, -0.1], 1.5).unwrap();
        let f = random_unit(&params, 5, seed);
        let g = truncate_to_bn(&f, big_n);
        prop_assert!(norm_parseval(&g).unwrap() <= norm_parseval(&f).unwrap() * (1.0 + 1e-15));
        prop_assert!(g.coeffs().keys().all(|k| k.within((big_n / 2) as f64)));
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>(), c in -2.0f64..2.0, t in 0.1f64..10.0) {
        let params = SpaceParams::one_dim(c, t).unwrap();
        let f = random_unit(&params, 3, seed);
        let back = LatticeFunction::from_json(&f.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn frame_ratio_is_within_cube_range(seed in any::<u64>(), big_r in 1.1f64..5.0, n in 1usize..3) {
        let params = SpaceParams::new(vec![0.3; n], 1.0).unwrap();
        let f = random_unit(&params, 2, seed);
        let cube = ConcentrationCube::new(big_r, n).unwrap();
        let pts = draw_uniform(50, &cube, seed).unwrap();
        let (w, d) = empirical_frame(&f, &pts, params.c());
        let rn = big_r.powi(n as i32);
        prop_assert!(w >= d / rn * (1.0 - 1e-12) && w <= d * rn * (1.0 + 1e-12));
    }

    #[test]
    fn dimension_bound_monotone(eps in 0.01f64..5.0, t in 0.2f64..5.0, big_r in 1.1f64..5.0, n in 1usize..4, v in variant()) {
        let d = dimension_bound(eps, t, big_r, n, v).unwrap();
        prop_assert!(dimension_bound(eps * 1.1, t, big_r, n, v).unwrap() < d);
        prop_assert!(dimension_bound(eps, t * 1.1, big_r, n, v).unwrap() > d);
        prop_assert!(dimension_bound(eps, t, big_r * 1.1, n, v).unwrap() > d);
        prop_assert!(covering_log_bound(eps, t, big_r, n, v).unwrap() >= 0.0);
    }

    #[test]
    fn theorem_constants_monotone_in_mu(mu in 0.01f64..0.9, t in 0.2f64..5.0, big_r in 1.1f64..4.0, n in 1usize..3, v in variant()) {
        let a = main_theorem_constants(mu, t, big_r, n, v).unwrap();
        let b = main_theorem_constants(mu * 1.05, t, big_r, n, v).unwrap();
        prop_assert!(b.alpha > a.alpha);
        prop_assert!(b.log_beta < a.log_beta);
    }

    #[test]
    fn failure_bound_decreases_in_r(eps in 0.05f64..2.0, r in 1u64..1_000_000_000, big_r in 1.1f64..3.0, v in variant()) {
        let a = prob_est_failure_log_bound(eps, r, 1.0, big_r, 1, v).unwrap();
        let b = prob_est_failure_log_bound(eps, r + r / 2 + 1, 1.0, big_r, 1, v).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn log_space_agrees_with_direct(eps in 1.0f64..8.0, big_r in 1.05f64..1.5, r in 1u64..60, n in 1usize..3) {
        // 2 (64R^n/ε)^{d} e^{-r·coef} with d the dimension bound at radius ε/(4R^n), all in linear space
        let rn = big_r.powi(n as i32);
        let d = dimension_bound(eps / (4.0 * rn), 0.2, big_r, n, Variant::Paper).unwrap();
        let q = (big_r * big_r - 1.0).powi(n as i32);
        let coef = 3.0 * eps * eps * q / (4.0 * rn * (6.0 * rn + eps * q));
        let direct = 2.0 * (64.0 * rn / eps).powf(d) * (-(r as f64) * coef).exp();
        prop_assume!(direct.is_finite() && direct > 1e-300);
        let log = prob_est_failure_log_bound(eps, r, 0.2, big_r, n, Variant::Paper).unwrap();
        prop_assert!((log.exp() - direct).abs() <= 1e-12 * direct, "{} vs {}", log.exp(), direct);
        prop_assert_eq!(prob_est_failure_bound(eps, r, 0.2, big_r, n, Variant::Paper).unwrap(), log.exp());
    }

    #[test]
    fn min_samples_is_tight(mu in 0.05f64..0.95, big_r in 1.2f64..3.0, target in 0.001f64..0.5, v in variant()) {
        let s = min_samples(mu, 1.0, big_r, 1, target, v).unwrap();
        let k = main_theorem_constants(mu, 1.0, big_r, 1, v).unwrap();
        prop_assert!(k.log_failure(s.min_r) <= target.ln());
        prop_assert!(s.min_r == 1 || k.log_failure(s.min_r - 1) > target.ln());
    }

    #[test]
    fn min_n_is_monotone_and_consistent(eps in 0.01f64..2.0, t in 0.5f64..4.0, big_r in 1.1f64..4.0) {
        let params = SpaceParams::one_dim(0.0, t).unwrap();
        let cube = ConcentrationCube::new(big_r, 1).unwrap();
        let a = min_n_for_error(eps, &params, &cube).unwrap();
        let b = min_n_for_error(eps * 1.5, &params, &cube).unwrap();
        prop_assert!(b <= a);
        prop_assert!(truncation_error_bound(a, &params, &cube, 1.0) < eps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn truncation_error_is_dominated(seed in any::<u64>(), big_n in 3u64..40, t in prop::sample::select(vec![1.0, 2.0])) {
        let params = SpaceParams::one_dim(0.4, t).unwrap();
        let cube = ConcentrationCube::new(std::f64::consts::E, 1).unwrap();
        let f = random_unit(&params, 20, seed);
        let bound = truncation_error_bound(big_n, &params, &cube, 1.0);
        let g = f.restrict(&IndexWindow::Cube { half_width: (big_n / 2) as f64 });
        let err = probe_sup_distance(&f, &g, &cube).unwrap();
        prop_assert!(err <= bound, "N={} err={} bound={}", big_n, err, bound);
    }
}
