//! Integrator against closed-form matrix exponentials, and the drift norm ρ
//! against a randomized Rayleigh-quotient search.

mod common;

use common::{companion, companion_exp, drift_matrix, rayleigh_lower_bound};
use etsmc::etm::BoundConstants;
use etsmc::linalg::norm;
use etsmc::plant::DisturbanceSpec;
use etsmc::scenario::builtin;
use etsmc::sim::rk4_integrate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn rk4_matches_matrix_exponential() {
    let zero = DisturbanceSpec::zero();
    for (lambdas, x0) in [
        (vec![-1.0, -2.0, -3.0], vec![1.0, -0.5, 0.25]),
        (vec![-0.5, -4.0], vec![2.0, 1.0]),
        (vec![-0.3, -1.1, -2.5, -6.0], vec![1.0, 0.0, -1.0, 3.0]),
    ] {
        let a = companion(&lambdas);
        let b = vec![0.0; lambdas.len()];
        for t in [0.5, 2.0, 5.0] {
            let got = rk4_integrate(&a, &b, 0.0, &zero, &x0, 0.0, t, 1e-3).unwrap();
            let want = companion_exp(&lambdas, t, &x0);
            let err: Vec<f64> = got.iter().zip(&want).map(|(g, w)| g - w).collect();
            let rel = norm(&err) / norm(&want);
            assert!(rel < 1e-8, "λ = {lambdas:?}, t = {t}: relative error {rel:e}");
        }
    }
}

#[test]
fn rk4_error_shrinks_at_fourth_order() {
    let lambdas = [-1.0, -2.0, -3.0];
    let a = companion(&lambdas);
    let x0 = [1.0, 1.0, 1.0];
    let want = companion_exp(&lambdas, 1.0, &x0);
    let err = |dt: f64| {
        let got = rk4_integrate(&a, &[0.0; 3], 0.0, &DisturbanceSpec::zero(), &x0, 0.0, 1.0, dt).unwrap();
        norm(&got.iter().zip(&want).map(|(g, w)| g - w).collect::<Vec<_>>())
    };
    let ratio = err(0.1) / err(0.05);
    assert!((ratio.log2() - 4.0).abs() < 0.3, "observed order {}", ratio.log2());
}

#[test]
fn rho_is_certified_by_randomized_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240531);
    for name in ["example1", "example2", "example3"] {
        let sc = builtin::by_name(name).unwrap();
        let (a, b) = sc.model.matrices().unwrap();
        let c = &sc.sliding.c;
        let rho = BoundConstants::new(&a, &b, c, 0.0, 1.0).unwrap().rho;
        let m = drift_matrix(&a, &b, c);
        let lower = rayleigh_lower_bound(&m, 100_000, &mut rng);
        assert!(lower <= rho * (1.0 + 1e-12), "{name}: sample {lower} exceeds rho {rho}");
        assert!(rho - lower <= 1e-6 * rho.max(1.0), "{name}: rho {rho} vs search {lower}");
    }
}
