use super::{Matrix, Tolerances};
use crate::error::{Error, Result};

/// Eigen-decomposition of a symmetric matrix.
///
/// `vectors` holds the orthonormal eigenvectors as columns, in the same
/// order as the ascending `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

pub fn symmetric_eigs(s: &Matrix) -> Result<SymmetricEigen> {
    symmetric_eigs_with(s, &Tolerances::default())
}

/// Classical Jacobi: rotate away the largest off-diagonal entry until the
/// off-diagonal Frobenius norm drops below tolerance.
pub fn symmetric_eigs_with(s: &Matrix, tol: &Tolerances) -> Result<SymmetricEigen> {
    if !s.is_square() {
        return Err(Error::dim(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let n = s.rows();
    if n == 0 {
        return Err(Error::dim("eigen-decomposition of an empty matrix"));
    }
    let sym_tol = tol.symmetry * s.max_abs().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (s[(i, j)] - s[(j, i)]).abs();
            if gap > sym_tol {
                return Err(Error::contract(format!(
                    "matrix is not symmetric: |S[{i},{j}] - S[{j},{i}]| = {gap:e}"
                )));
            }
        }
    }

    let mut a = s.symmetrized();
    let mut v = Matrix::identity(n);
    let stop = tol.jacobi_off_diagonal * a.frobenius().max(1.0);
    let max_rotations = 200 * n * n + 100;

    for _ in 0..max_rotations {
        let mut off = 0.0;
        let (mut p, mut q, mut big) = (0, 0, -1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let x = a[(i, j)];
                off += 2.0 * x * x;
                if x.abs() > big {
                    big = x.abs();
                    p = i;
                    q = j;
                }
            }
        }
        if off.sqrt() < stop {
            return Ok(sorted(a, v));
        }
        rotate(&mut a, &mut v, p, q);
    }
    Err(Error::Numerical(format!(
        "Jacobi iteration did not converge for {n}x{n} matrix"
    )))
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn sorted(a: Matrix, v: Matrix) -> SymmetricEigen {
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    SymmetricEigen { values, vectors }
}

/// Spectral norm `sqrt(λ_max(MᵀM))`.
pub fn induced_norm2(m: &Matrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let mtm = m.transpose().matmul(m).expect("MᵀM shapes agree");
    let eig = symmetric_eigs(&mtm).expect("MᵀM is symmetric");
    eig.max().max(0.0).sqrt()
}

/// Singular values in descending order (one-sided Jacobi on the columns).
///
/// Works directly on `M`, so small singular values keep full relative
/// accuracy instead of being squared away as with `eig(MᵀM)`.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| m.col(j)).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let x = u[p][k];
                    let y = u[q][k];
                    u[p][k] = c * x - s * y;
                    u[q][k] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = u
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.truncate(rows.min(cols));
    sv
}
