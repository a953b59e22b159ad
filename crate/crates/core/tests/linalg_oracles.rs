//! Linear algebra checked against independent computations: polynomial
//! roots by Durand–Kerner, norms by power iteration, Lyapunov residuals.

use etsmc::linalg::{
    char_poly, dot, induced_norm2, is_hurwitz, singular_values, solve_lyapunov, symmetric_eigs,
    Matrix,
};
use etsmc::plant::to_regular_form;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

/// All roots of a monic polynomial (descending coefficients).
fn durand_kerner(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 * bound {
            break;
        }
    }
    z
}

fn mat(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

fn max_real_part(m: &Matrix) -> f64 {
    durand_kerner(&char_poly(m).unwrap())
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn char_poly_roots_match_known_spectra() {
    // Upper triangular: eigenvalues on the diagonal.
    let m = mat(&[&[-1.0, 4.0, 2.0], &[0.0, -2.0, 7.0], &[0.0, 0.0, -3.0]]);
    let mut re: Vec<f64> = durand_kerner(&char_poly(&m).unwrap()).iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    for (got, want) in re.iter().zip([-3.0, -2.0, -1.0]) {
        assert!((got - want).abs() < 1e-9, "{re:?}");
    }
}

#[test]
fn routh_agrees_with_root_locations_on_published_blocks() {
    let cases = [
        (mat(&[&[0.0, 1.0], &[-14.4, -5.9]]), true),
        (mat(&[&[0.0, 1.0], &[-4.92, -2.7]]), true),
        (mat(&[&[0.0, 1.0], &[-29.6, -1.5]]), true),
        (mat(&[&[0.0, 1.0], &[2.0, -1.0]]), false),
        (mat(&[&[-14.0]]), true),
        (mat(&[&[0.5]]), false),
    ];
    for (m, want) in cases {
        assert_eq!(is_hurwitz(&m).unwrap(), want, "{m:?}");
        assert_eq!(max_real_part(&m) < 0.0, want);
    }
}

#[test]
fn lyapunov_solution_has_small_residual_and_is_positive() {
    let a = mat(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[-6.0, -11.0, -6.0]]);
    let q = Matrix::identity(3);
    let p = solve_lyapunov(&a, &q).unwrap();
    let res = a.transpose().matmul(&p).unwrap().add(&p.matmul(&a).unwrap()).unwrap().add(&q).unwrap();
    assert!(res.max_abs() < 1e-10, "{res:?}");
    assert!(symmetric_eigs(&p).unwrap().min() > 0.0);
}

#[test]
fn regular_form_of_quadrotor_roll_channel() {
    let a = mat(&[
        &[0.0, 1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 9.8, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 80.0],
        &[0.0, 0.0, 0.0, 0.0, -35.0],
    ]);
    let model = to_regular_form(&a, &Matrix::column(&[0.0, 0.0, 0.0, 0.0, 35.0])).unwrap();
    assert_eq!(model.controllability_rank, 5);
    let tb = model.t_r.matvec(&[0.0, 0.0, 0.0, 0.0, 35.0]).unwrap();
    assert!(tb[..4].iter().all(|v| v.abs() < 1e-12) && (tb[4] - 1.0).abs() < 1e-12);
    // Similar matrices share the characteristic polynomial.
    let p0 = char_poly(&a).unwrap();
    let p1 = char_poly(&model.a).unwrap();
    for (x, y) in p0.iter().zip(&p1) {
        assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()), "{p0:?} vs {p1:?}");
    }
}

fn power_iteration_norm(m: &Matrix) -> f64 {
    let mtm = m.transpose().matmul(m).unwrap();
    let mut v = vec![1.0; m.cols()];
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = mtm.matvec(&v).unwrap();
        let nw = dot(&w, &w).sqrt();
        if nw == 0.0 {
            return 0.0;
        }
        lambda = nw / dot(&v, &v).sqrt();
        v = w.iter().map(|x| x / nw).collect();
    }
    lambda.sqrt()
}

fn square(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |d| Matrix::new(n, n, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        rng_seed: RngSeed::Fixed(0x5eed),
        ..ProptestConfig::default()
    })]

    #[test]
    fn char_poly_trace_and_determinant(m in (1usize..=5).prop_flat_map(square)) {
        let n = m.rows();
        let p = char_poly(&m).unwrap();
        prop_assert!((p[1] + m.trace()).abs() < 1e-9 * (1.0 + m.max_abs() * n as f64));
        // Product of the roots equals (-1)^n p_n.
        let prod = durand_kerner(&p).iter().fold(Complex64::new(1.0, 0.0), |a, z| a * z);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((prod.re - sign * p[n]).abs() < 1e-6 * (1.0 + p[n].abs()));
    }

    #[test]
    fn routh_matches_durand_kerner(m in (1usize..=5).prop_flat_map(square)) {
        let spectral = max_real_part(&m);
        // Skip matrices with eigenvalues too close to the axis to call.
        prop_assume!(spectral.abs() > 1e-6);
        prop_assert_eq!(is_hurwitz(&m).unwrap(), spectral < 0.0);
    }

    #[test]
    fn induced_norm_matches_power_iteration(m in (1usize..=5).prop_flat_map(square)) {
        let got = induced_norm2(&m);
        let oracle = power_iteration_norm(&m);
        prop_assert!((got - oracle).abs() <= 1e-6 * (1.0 + oracle), "{} vs {}", got, oracle);
        prop_assert!((singular_values(&m)[0] - got).abs() <= 1e-12 * (1.0 + got));
    }

    #[test]
    fn symmetric_eigs_reconstruct(m in (1usize..=5).prop_flat_map(square)) {
        let s = m.add(&m.transpose()).unwrap().scale(0.5);
        let e = symmetric_eigs(&s).unwrap();
        let d = Matrix::diag(&e.values);
        let back = e.vectors.matmul(&d).unwrap().matmul(&e.vectors.transpose()).unwrap();
        prop_assert!(back.sub(&s).unwrap().max_abs() < 1e-9 * (1.0 + s.max_abs()));
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn lyapunov_residual_for_shifted_stable(m in (1usize..=4).prop_flat_map(square)) {
        // Shift the spectrum left of -1 so the equation is well posed.
        let n = m.rows();
        let shift = induced_norm2(&m) + 1.0;
        let a = m.sub(&Matrix::identity(n).scale(shift)).unwrap();
        let q = Matrix::identity(n);
        let p = solve_lyapunov(&a, &q).unwrap();
        let res = a.transpose().matmul(&p).unwrap().add(&p.matmul(&a).unwrap()).unwrap().add(&q).unwrap();
        prop_assert!(res.max_abs() < 1e-8 * (1.0 + induced_norm2(&a) * induced_norm2(&p)));
        prop_assert!(symmetric_eigs(&p).unwrap().min() > 0.0);
    }
}
