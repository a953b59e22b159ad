use super::{induced_norm2, is_hurwitz_with, solve_with, symmetric_eigs_with, Matrix, Tolerances};
use crate::error::{Error, Result};

pub fn solve_lyapunov(acl: &Matrix, q: &Matrix) -> Result<Matrix> {
    solve_lyapunov_with(acl, q, &Tolerances::default())
}

/// Solves `AclᵀP + P·Acl = -Q` for symmetric positive definite `P`.
///
/// The equation is vectorized row-major into an `m² x m²` system and solved
/// by Gaussian elimination.
pub fn solve_lyapunov_with(acl: &Matrix, q: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    if !acl.is_square() || !q.is_square() || acl.rows() != q.rows() {
        return Err(Error::dim(format!(
            "Lyapunov solve needs square matrices of equal size, got {}x{} and {}x{}",
            acl.rows(),
            acl.cols(),
            q.rows(),
            q.cols()
        )));
    }
    if !is_hurwitz_with(acl, tol)? {
        return Err(Error::contract("closed-loop matrix is not Hurwitz"));
    }
    let q_eig = symmetric_eigs_with(q, tol)?;
    if q_eig.min() <= 0.0 {
        return Err(Error::contract(format!(
            "Q is not positive definite (λ_min = {:e})",
            q_eig.min()
        )));
    }

    let m = acl.rows();
    let mut k = Matrix::zeros(m * m, m * m);
    for i in 0..m {
        for j in 0..m {
            let row = i * m + j;
            for l in 0..m {
                k[(row, l * m + j)] += acl[(l, i)];
                k[(row, i * m + l)] += acl[(l, j)];
            }
        }
    }
    let rhs: Vec<f64> = q.as_slice().iter().map(|v| -v).collect();
    let p = Matrix::new(m, m, solve_with(&k, &rhs, tol)?)?.symmetrized();

    let residual = acl
        .transpose()
        .matmul(&p)?
        .add(&p.matmul(acl)?)?
        .add(q)?;
    let res = induced_norm2(&residual);
    let scale = (induced_norm2(acl) * induced_norm2(&p)).max(1.0);
    if res > tol.lyapunov_residual * scale {
        return Err(Error::Numerical(format!(
            "Lyapunov residual {res:e} exceeds tolerance"
        )));
    }
    let p_eig = symmetric_eigs_with(&p, tol)?;
    if p_eig.min() <= 0.0 {
        return Err(Error::Numerical(format!(
            "Lyapunov solution is not positive definite (λ_min = {:e})",
            p_eig.min()
        )));
    }
    Ok(p)
}
