//! LTI plant in original and regular form, plus matched disturbances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, singular_values, Matrix, Tolerances};

/// Single-input LTI plant `ẋ = Ãx + B̃(u + d)` together with its regular form.
///
/// With `x = T_r x̃` the regular form reads `ẋ = Ax + e_n(u + d)` and `A`
/// splits into the blocks `A11`, `A12`, `A21`, `A22`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiModel {
    pub a_tilde: Matrix,
    pub b_tilde: Vec<f64>,
    pub t_r: Matrix,
    pub t_r_inv: Matrix,
    pub a: Matrix,
    pub a11: Matrix,
    pub a12: Matrix,
    pub a21: Matrix,
    pub a22: f64,
    /// Rank of the controllability matrix (always `n` for a constructed model).
    pub controllability_rank: usize,
}

impl LtiModel {
    pub fn dim(&self) -> usize {
        self.b_tilde.len()
    }

    /// Regular-form coordinates `T_r x̃` of a state given in original coordinates.
    pub fn to_regular(&self, x_tilde: &[f64]) -> Result<Vec<f64>> {
        self.t_r.matvec(x_tilde)
    }

    pub fn from_regular(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.t_r_inv.matvec(x)
    }
}

pub fn to_regular_form(a_tilde: &Matrix, b_tilde: &Matrix) -> Result<LtiModel> {
    to_regular_form_with(a_tilde, b_tilde, &Tolerances::default())
}

/// Builds the regular form with a Householder reflection plus a scaling of
/// the last row.
///
/// With `u = B̃/‖B̃‖`, `v = u + sign(u_n) e_n` and `H = I - 2vvᵀ/vᵀv`,
/// `H u = -sign(u_n) e_n`; then `T_r = diag(1, .., 1, -sign(u_n)/‖B̃‖) H`.
/// `sign(0)` is taken as `+1`.
pub fn to_regular_form_with(
    a_tilde: &Matrix,
    b_tilde: &Matrix,
    tol: &Tolerances,
) -> Result<LtiModel> {
    let n = a_tilde.rows();
    if !a_tilde.is_square() || n == 0 {
        return Err(Error::dim(format!(
            "Ã must be square and non-empty, got {}x{}",
            a_tilde.rows(),
            a_tilde.cols()
        )));
    }
    if b_tilde.rows() != n || b_tilde.cols() != 1 {
        return Err(Error::dim(format!(
            "B̃ must be {n}x1, got {}x{}",
            b_tilde.rows(),
            b_tilde.cols()
        )));
    }
    let b: Vec<f64> = b_tilde.col(0);
    let b_norm = norm(&b);
    if b_norm == 0.0 {
        return Err(Error::contract("input matrix B̃ is zero"));
    }

    let rank = controllability_rank(a_tilde, &b, tol)?;
    if rank < n {
        return Err(Error::Design(format!(
            "pair (Ã, B̃) is not controllable: controllability matrix has rank {rank} < {n}"
        )));
    }

    let is_unit_last = b[..n - 1].iter().all(|v| *v == 0.0) && b[n - 1] == 1.0;
    let (t_r, t_r_inv) = if is_unit_last {
        (Matrix::identity(n), Matrix::identity(n))
    } else {
        let u: Vec<f64> = b.iter().map(|v| v / b_norm).collect();
        let sgn = if u[n - 1] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = u.clone();
        v[n - 1] += sgn;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        let h = Matrix::identity(n)
            .sub(&Matrix::outer(&v, &v).scale(2.0 / vtv))
            .expect("same shape");
        let mut d = vec![1.0; n];
        d[n - 1] = -sgn / b_norm;
        let mut d_inv = vec![1.0; n];
        d_inv[n - 1] = -sgn * b_norm;
        let t = Matrix::diag(&d).matmul(&h)?;
        let t_inv = h.matmul(&Matrix::diag(&d_inv))?;
        (t, t_inv)
    };

    let tb = t_r.matvec(&b)?;
    let off = tb[..n - 1].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if off > tol.regular_form || (tb[n - 1] - 1.0).abs() > tol.regular_form {
        return Err(Error::Numerical(format!(
            "regular-form transformation failed: T_r B̃ = {tb:?}"
        )));
    }

    let a = t_r.matmul(a_tilde)?.matmul(&t_r_inv)?;
    let m = n - 1;
    Ok(LtiModel {
        a_tilde: a_tilde.clone(),
        b_tilde: b,
        a11: a.block(0, m, 0, m),
        a12: a.block(0, m, m, n),
        a21: a.block(m, n, 0, m),
        a22: a[(m, m)],
        t_r,
        t_r_inv,
        a,
        controllability_rank: rank,
    })
}

/// Numerical rank of `[B, AB, .., A^{n-1}B]`, relative singular value threshold.
pub fn controllability_rank(a: &Matrix, b: &[f64], tol: &Tolerances) -> Result<usize> {
    let n = a.rows();
    let mut cols = Vec::with_capacity(n);
    let mut v = b.to_vec();
    for _ in 0..n {
        cols.push(v.clone());
        v = a.matvec(&v)?;
    }
    let mut ctrb = Matrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            ctrb[(i, j)] = col[i];
        }
    }
    let sv = singular_values(&ctrb);
    let top = sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|s| **s > tol.rank * top).count())
}

/// Regular-form dynamics `A x + e_n (u + d)`.
pub fn plant_derivative(model: &LtiModel, x: &[f64], u: f64, d: f64) -> Result<Vec<f64>> {
    if x.len() != model.dim() {
        return Err(Error::contract(format!(
            "state has length {}, model has dimension {}",
            x.len(),
            model.dim()
        )));
    }
    let mut dx = model.a.matvec(x)?;
    *dx.last_mut().expect("n >= 1") += u + d;
    Ok(dx)
}

/// Original-coordinate dynamics `Ã x̃ + B̃ (u + d)`.
pub fn original_derivative(model: &LtiModel, x: &[f64], u: f64, d: f64) -> Result<Vec<f64>> {
    if x.len() != model.dim() {
        return Err(Error::contract(format!(
            "state has length {}, model has dimension {}",
            x.len(),
            model.dim()
        )));
    }
    let mut dx = model.a_tilde.matvec(x)?;
    for (o, b) in dx.iter_mut().zip(&model.b_tilde) {
        *o += b * (u + d);
    }
    Ok(dx)
}

/// One term `a · sin(ω t + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineTerm {
    pub amplitude: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Signal {
    Zero,
    Sinusoid {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Cosine {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    SumOfSinusoids {
        terms: Vec<SineTerm>,
    },
    /// Piecewise constant: `values[k]` holds on `[times[k], times[k+1])`;
    /// the first value also covers times before `times[0]`.
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

/// Matched disturbance with a declared bound `d_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub signal: Signal,
    pub d_max: f64,
}

impl DisturbanceSpec {
    pub fn zero() -> Self {
        Self {
            signal: Signal::Zero,
            d_max: 0.0,
        }
    }

    pub fn sinusoid(amplitude: f64, omega: f64, d_max: f64) -> Self {
        Self {
            signal: Signal::Sinusoid {
                amplitude,
                omega,
                phase: 0.0,
            },
            d_max,
        }
    }

    pub fn cosine(amplitude: f64, omega: f64, d_max: f64) -> Self {
        Self {
            signal: Signal::Cosine {
                amplitude,
                omega,
                phase: 0.0,
            },
            d_max,
        }
    }

    /// Checks the declared bound against the signal's worst case.
    pub fn validate(&self) -> Result<()> {
        let path = "disturbance";
        if !self.d_max.is_finite() || self.d_max < 0.0 {
            return Err(Error::validation(
                format!("{path}.d_max"),
                "must be finite and non-negative",
            ));
        }
        let peak = match &self.signal {
            Signal::Zero => return Ok(()),
            Signal::Sinusoid {
                amplitude,
                omega,
                phase,
            }
            | Signal::Cosine {
                amplitude,
                omega,
                phase,
            } => {
                finite(&[*amplitude, *omega, *phase], path)?;
                amplitude.abs()
            }
            Signal::SumOfSinusoids { terms } => {
                for t in terms {
                    finite(&[t.amplitude, t.omega, t.phase], path)?;
                }
                terms.iter().map(|t| t.amplitude.abs()).sum()
            }
            Signal::Table { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::validation(
                        format!("{path}.signal"),
                        "table needs equally many times and values, at least one",
                    ));
                }
                finite(times, path)?;
                finite(values, path)?;
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::validation(
                        format!("{path}.signal.times"),
                        "must be strictly increasing",
                    ));
                }
                values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }
        };
        if self.d_max == 0.0 {
            return Err(Error::validation(
                format!("{path}.d_max"),
                "must be positive for a non-zero signal",
            ));
        }
        if peak > self.d_max {
            return Err(Error::Config(format!(
                "declared bound d_max = {} is below the signal peak {peak}",
                self.d_max
            )));
        }
        Ok(())
    }

    /// Signal value without the bound check.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match &self.signal {
            Signal::Zero => 0.0,
            Signal::Sinusoid {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).sin(),
            Signal::Cosine {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).cos(),
            Signal::SumOfSinusoids { terms } => terms
                .iter()
                .map(|s| s.amplitude * (s.omega * t + s.phase).sin())
                .sum(),
            Signal::Table { times, values } => {
                let k = times.partition_point(|&x| x <= t);
                values[k.saturating_sub(1)]
            }
        }
    }

    /// Signal value; exceeding the declared bound is a configuration error.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = self.value(t);
        if v.abs() > self.d_max * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "|d({t})| = {} exceeds the declared bound d_max = {}",
                v.abs(),
                self.d_max
            )));
        }
        Ok(v)
    }
}

fn finite(values: &[f64], path: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::validation(
            format!("{path}.signal"),
            "parameters must be finite",
        ))
    }
}
