//! Small dense real linear algebra.
//!
//! Everything here works on matrices of dimension six or less, so the
//! algorithms favour robustness and determinism over asymptotic speed:
//! Faddeev–LeVerrier for characteristic polynomials, the Routh array for
//! stability, classical Jacobi rotations for symmetric eigenproblems and a
//! Kronecker-sum linear solve for the Lyapunov equation.

mod eigen;
mod lyapunov;
mod matrix;
mod poly;

pub use eigen::{induced_norm2, singular_values, symmetric_eigs, symmetric_eigs_with, SymmetricEigen};
pub use lyapunov::{solve_lyapunov, solve_lyapunov_with};
pub use matrix::{dot, norm, Matrix};
pub use poly::{char_poly, is_hurwitz, is_hurwitz_with, routh_first_column};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by the linear algebra routines.
///
/// The defaults are the values the rest of the crate is tested against;
/// scenarios may override any of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted `|S_ij - S_ji|`, relative to `max(1, max|S|)`.
    pub symmetry: f64,
    /// Jacobi stops once the off-diagonal Frobenius norm falls below this,
    /// relative to `max(1, ||S||_F)`.
    pub jacobi_off_diagonal: f64,
    /// A Routh pivot with magnitude below this (relative to its parent rows)
    /// counts as zero, i.e. marginal.
    pub routh_pivot: f64,
    /// Accepted Lyapunov residual, relative to `max(1, ||A|| ||P||)`.
    pub lyapunov_residual: f64,
    /// Relative singular value threshold for rank decisions.
    pub rank: f64,
    /// Relative pivot threshold below which Gaussian elimination reports singularity.
    pub singular_pivot: f64,
    /// Accepted error in the regular-form identities.
    pub regular_form: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-10,
            jacobi_off_diagonal: 1e-12,
            routh_pivot: 1e-12,
            lyapunov_residual: 1e-8,
            rank: 1e-9,
            singular_pivot: 1e-14,
            regular_form: 1e-10,
        }
    }
}

/// Solves `M x = rhs` by Gaussian elimination with partial pivoting.
pub fn solve(m: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    solve_with(m, rhs, &Tolerances::default())
}

pub fn solve_with(m: &Matrix, rhs: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::dim(format!(
            "linear solve needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if rhs.len() != n {
        return Err(Error::dim(format!(
            "right-hand side has length {}, expected {n}",
            rhs.len()
        )));
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut a = m.as_slice().to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= tol.singular_pivot * scale {
            return Err(Error::Numerical(format!(
                "matrix is singular to working precision (pivot {pivot_abs:e} in column {col})"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= factor * a[col * n + j];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = ((r + 1)..n).map(|j| a[r * n + j] * x[j]).sum();
        x[r] = (b[r] - tail) / a[r * n + r];
    }
    Ok(x)
}

/// Inverse by column-wise solves.
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    let n = m.rows();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = solve(m, &e)?;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}
