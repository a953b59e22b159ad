//! Oracles shared by the numerical and acceptance tests.

use etsmc::linalg::{dot, norm, solve, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `e^{At} x0` for a companion matrix with distinct real eigenvalues, via
/// the Vandermonde eigenvector matrix.
pub fn companion_exp(lambdas: &[f64], t: f64, x0: &[f64]) -> Vec<f64> {
    let n = lambdas.len();
    let v = Matrix::new(
        n,
        n,
        (0..n)
            .flat_map(|i| lambdas.iter().map(move |l| l.powi(i as i32)))
            .collect(),
    )
    .unwrap();
    let coeff = solve(&v, x0).unwrap();
    let scaled: Vec<f64> = coeff
        .iter()
        .zip(lambdas)
        .map(|(c, l)| c * (l * t).exp())
        .collect();
    v.matvec(&scaled).unwrap()
}

pub fn companion(lambdas: &[f64]) -> Matrix {
    // Monic polynomial with the given roots, ascending-power coefficients.
    let mut poly = vec![1.0];
    for &l in lambdas {
        let mut next = vec![0.0; poly.len() + 1];
        for (k, p) in poly.iter().enumerate() {
            next[k + 1] += p;
            next[k] -= l * p;
        }
        poly = next;
    }
    let n = lambdas.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n - 1 {
        m[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        m[(n - 1, j)] = -poly[j];
    }
    m
}

pub fn drift_matrix(a: &Matrix, b: &[f64], c: &[f64]) -> Matrix {
    let w = a.vecmat(c).unwrap();
    a.sub(&Matrix::outer(b, &w).scale(1.0 / dot(c, b))).unwrap()
}

/// Best `‖Mv‖/‖v‖` over `samples` random directions, then power steps from
/// the best one. Every value is attained by a concrete `v`, so it is a
/// lower bound on the induced norm.
pub fn rayleigh_lower_bound(m: &Matrix, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let n = m.cols();
    let mut best = (0.0, vec![0.0; n]);
    for _ in 0..samples {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nv = norm(&v);
        if nv == 0.0 {
            continue;
        }
        let q = norm(&m.matvec(&v).unwrap()) / nv;
        if q > best.0 {
            best = (q, v);
        }
    }
    let mtm = m.transpose().matmul(m).unwrap();
    let (mut lower, mut v) = best;
    for _ in 0..200 {
        let w = mtm.matvec(&v).unwrap();
        let nw = norm(&w);
        v = w.iter().map(|x| x / nw).collect();
        lower = lower.max(norm(&m.matvec(&v).unwrap()));
    }
    lower
}
