use super::{Matrix, Tolerances};
use crate::error::{Error, Result};

/// Coefficients of `det(λI - M)` in descending powers, leading 1.
///
/// Faddeev–LeVerrier: `M_k = M M_{k-1} + c_{n-k+1} I`, `c_{n-k} = -tr(M M_k) / k`.
pub fn char_poly(m: &Matrix) -> Result<Vec<f64>> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::dim(format!(
            "characteristic polynomial needs a non-empty square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0);
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        let prev = *coeffs.last().expect("non-empty");
        let mut next = m.matmul(&mk)?;
        for i in 0..n {
            next[(i, i)] += prev;
        }
        mk = next;
        let am = m.matmul(&mk)?;
        coeffs.push(-am.trace() / k as f64);
    }
    Ok(coeffs)
}

/// First column of the Routh array for a polynomial in descending powers.
///
/// Returns `None` when a pivot vanishes (relative to the rows it is built
/// from), which signals a root on or symmetric about the imaginary axis.
pub fn routh_first_column(coeffs: &[f64], tol: &Tolerances) -> Option<Vec<f64>> {
    let n = coeffs.len().checked_sub(1)?;
    let mut prev: Vec<f64> = coeffs.iter().step_by(2).copied().collect();
    let mut cur: Vec<f64> = coeffs.iter().skip(1).step_by(2).copied().collect();
    let mut first = vec![prev[0]];
    if n == 0 {
        return Some(first);
    }
    for row in 1..=n {
        let scale = prev
            .iter()
            .chain(cur.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let pivot = cur.first().copied().unwrap_or(0.0);
        if pivot.abs() <= tol.routh_pivot * scale {
            return None;
        }
        first.push(pivot);
        if row == n {
            break;
        }
        let width = prev.len().max(cur.len());
        let at = |v: &[f64], j: usize| v.get(j).copied().unwrap_or(0.0);
        let next: Vec<f64> = (0..width.saturating_sub(1).max(1))
            .map(|j| (pivot * at(&prev, j + 1) - prev[0] * at(&cur, j + 1)) / pivot)
            .collect();
        prev = cur;
        cur = next;
    }
    Some(first)
}

pub fn is_hurwitz(m: &Matrix) -> Result<bool> {
    is_hurwitz_with(m, &Tolerances::default())
}

/// Routh–Hurwitz test on `char_poly(m)`. Marginal cases are not Hurwitz.
pub fn is_hurwitz_with(m: &Matrix, tol: &Tolerances) -> Result<bool> {
    let coeffs = char_poly(m)?;
    Ok(match routh_first_column(&coeffs, tol) {
        Some(col) => col.iter().all(|v| *v > 0.0),
        None => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn scalar_and_small_polynomials() {
        assert_eq!(char_poly(&m(&[&[-14.0]])).unwrap(), vec![1.0, 14.0]);
        assert_eq!(char_poly(&Matrix::identity(2)).unwrap(), vec![1.0, -2.0, 1.0]);
        assert_eq!(
            char_poly(&m(&[&[0.0, 1.0], &[-2.0, -3.0]])).unwrap(),
            vec![1.0, 3.0, 2.0]
        );
    }

    #[test]
    fn rejects_non_square() {
        assert!(char_poly(&Matrix::zeros(2, 3)).is_err());
        assert!(is_hurwitz(&Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn hurwitz_verdicts() {
        assert!(is_hurwitz(&m(&[&[-14.0]])).unwrap());
        assert!(!is_hurwitz(&m(&[&[0.0, 1.0], &[-1.0, 0.0]])).unwrap());
        assert!(!is_hurwitz(&m(&[&[1.0]])).unwrap());
        assert!(!is_hurwitz(&m(&[&[0.0]])).unwrap());
        assert!(is_hurwitz(&m(&[&[0.0, 1.0], &[-2.0, -3.0]])).unwrap());
    }

    #[test]
    fn routh_column_for_cubic() {
        // (s+1)(s+2)(s+3) = s^3 + 6s^2 + 11s + 6
        let col = routh_first_column(&[1.0, 6.0, 11.0, 6.0], &Tolerances::default()).unwrap();
        assert_eq!(col.len(), 4);
        assert!((col[2] - 10.0).abs() < 1e-12);
        assert!((col[3] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn fifth_order_with_unstable_pair() {
        // (s+1)(s+2)(s+3)(s^2 - 0.1 s + 4)
        let a = [1.0, 6.0, 11.0, 6.0];
        let b = [1.0, -0.1, 4.0];
        let mut p = vec![0.0; 6];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                p[i + j] += x * y;
            }
        }
        let col = routh_first_column(&p, &Tolerances::default()).unwrap();
        assert!(col.iter().any(|v| *v <= 0.0));
    }
}
