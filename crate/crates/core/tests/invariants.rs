//! Property tests for the invariants the controller, trigger rules, cones,
//! bounds and engine are meant to keep.

use std::f64::consts::PI;

use etsmc::controller::{sign0, Controller, GainSchedule, Law};
use etsmc::etm::{asymptotic_floor, bound_t_i1, direction_rule};
use etsmc::geometry::{cone_angle, cone_coordinates, in_ideal_cone, SlidingConfig};
use etsmc::linalg::{dot, norm, Matrix};
use etsmc::scenario::builtin;
use etsmc::scenario::export::fmt_f64;
use etsmc::scenario::report::theta_fraction;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0xc0ffee),
        ..ProptestConfig::default()
    }
}

fn state(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, n)
}

fn ex1_controller() -> Controller {
    let a = Matrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 2.1, 4.0], &[-1.0, 2.0, 3.0]]).unwrap();
    Controller::new(&a, &[0.0, 0.0, 1.0], &[3.6, 2.0, 1.0], GainSchedule::affine(1.79, 0.49), 1.0).unwrap()
}

fn ex1_cone() -> SlidingConfig {
    SlidingConfig::new(vec![3.6, 2.0, 1.0], vec![1.23, 1.2, 1.0], vec![7.4, 0.9, 1.0], 0.0).unwrap()
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn sign_is_odd_with_zero_at_zero(v in -1e6f64..1e6) {
        prop_assert_eq!(sign0(-v), -sign0(v));
        prop_assert_eq!(sign0(0.0), 0.0);
        prop_assert!(sign0(v).abs() <= 1.0);
    }

    #[test]
    fn laws_are_odd_in_the_state(x in state(3)) {
        let ctrl = ex1_controller();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        for law in [Law::StateGain, Law::ConstantGain] {
            let (u, u_neg) = (ctrl.input(law, &x), ctrl.input(law, &neg));
            prop_assert!((u + u_neg).abs() <= 1e-12 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn cone_angle_is_symmetric_and_scale_free(
        a in prop::collection::vec(-5.0f64..5.0, 3),
        b in prop::collection::vec(-5.0f64..5.0, 3),
        k in 0.1f64..10.0,
    ) {
        prop_assume!(norm(&a) > 1e-3 && norm(&b) > 1e-3);
        let t = cone_angle(&a, &b).unwrap();
        prop_assert!((0.0..=PI).contains(&t));
        prop_assert!((t - cone_angle(&b, &a).unwrap()).abs() < 1e-12);
        let ka: Vec<f64> = a.iter().map(|v| v * k).collect();
        prop_assert!((t - cone_angle(&ka, &b).unwrap()).abs() < 1e-12);
        let na: Vec<f64> = a.iter().map(|v| -v).collect();
        prop_assert!((cone_angle(&na, &b).unwrap() - (PI - t)).abs() < 1e-12);
    }

    #[test]
    fn ideal_cone_is_a_double_cone(x in state(3), k in -100.0f64..100.0) {
        let cfg = ex1_cone();
        let prod = dot(&cfg.c_hat, &x) * dot(&cfg.c_check, &x);
        prop_assume!(prod.abs() > 1e-9 * (1.0 + dot(&x, &x)) && k.abs() > 1e-3);
        let kx: Vec<f64> = x.iter().map(|v| v * k).collect();
        prop_assert_eq!(in_ideal_cone(&cfg, &x), in_ideal_cone(&cfg, &kx));
    }

    #[test]
    fn cone_coordinates_are_convex_weights(x in state(3)) {
        let cfg = ex1_cone();
        prop_assume!(in_ideal_cone(&cfg, &x));
        let (l1, l2) = cone_coordinates(&cfg, &x).unwrap();
        prop_assert!(l1 >= 0.0 && l2 >= 0.0);
        prop_assert!((l1 + l2 - 1.0).abs() < 1e-12);
        let (sh, sc) = (dot(&cfg.c_hat, &x), dot(&cfg.c_check, &x));
        prop_assert!((l1 * sh + l2 * sc).abs() <= 1e-9 * (sh.abs() + sc.abs()));
    }

    #[test]
    fn direction_rule_quiet_at_reference_and_fires_on_reversal(x in state(3), n in 1u32..40) {
        prop_assume!(norm(&x) > 1e-6);
        let theta = 2.4155;
        prop_assert!(!direction_rule(&x, &x, theta, n, 1e-9));
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!(direction_rule(&neg, &x, theta, n, 1e-9));
    }

    #[test]
    fn direction_bound_grows_toward_the_floor(
        x1 in 1e-3f64..1e3, factor in 1.0f64..1e3, n in 1u32..40,
    ) {
        let (theta, rho, g, a) = (2.4155, 12.0, 144.0, 5.83);
        let lo = bound_t_i1(x1, theta, n, rho, g, a).derived;
        let hi = bound_t_i1(x1 * factor, theta, n, rho, g, a).derived;
        let floor = asymptotic_floor(theta, n, rho, a);
        prop_assert!(lo > 0.0);
        prop_assert!(hi >= lo * (1.0 - 1e-12));
        prop_assert!(hi <= floor * (1.0 + 1e-12));
    }

    #[test]
    fn theta_fraction_is_within_a_twentieth_degree(theta in 1e-3f64..PI) {
        let (p, q) = theta_fraction(theta);
        prop_assert!(1800 % q == 0);
        prop_assert!((theta - p as f64 * PI / q as f64).abs() <= PI / 3600.0 + 1e-15);
    }

    #[test]
    fn csv_numbers_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}

proptest! {
    #![proptest_config(config(12))]

    /// Short runs of the hybrid strategy from random initial states: every
    /// interval respects its bound, the input only changes at triggers, and
    /// a second run is bit-identical.
    #[test]
    fn short_runs_keep_hold_bounds_and_determinism(x0 in state(3)) {
        prop_assume!(norm(&x0) > 1.0);
        let mut sc = builtin::example1();
        sc.sim.x0 = x0;
        sc.sim.t_final = 2.0;
        sc.sim.record_stride = 1;
        let r = sc.run().unwrap();
        prop_assert_eq!(r.summary.bound_violations, 0);
        prop_assert!(r.summary.min_dt.unwrap_or(f64::INFINITY) > 0.0);

        let times: Vec<f64> = r.triggers.iter().map(|t| t.t).collect();
        for w in r.samples.windows(2) {
            let fired_between = times.iter().any(|&t| t > w[0].t && t <= w[1].t);
            if !fired_between {
                prop_assert_eq!(w[0].u, w[1].u, "input changed without a trigger at t = {}", w[1].t);
            }
        }
        let again = sc.run().unwrap();
        prop_assert_eq!(&r.summary.final_state, &again.summary.final_state);
        prop_assert_eq!(r.triggers.len(), again.triggers.len());
        prop_assert!(r.triggers.iter().zip(&again.triggers).all(|(a, b)| a.t == b.t && a.u == b.u));
    }
}
