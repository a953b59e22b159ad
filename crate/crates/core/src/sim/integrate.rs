use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::plant::DisturbanceSpec;

/// `ẋ = A x + b (u + d(t))` with `A` flattened row-major.
#[derive(Debug, Clone)]
pub(crate) struct Dynamics<'a> {
    a: Vec<f64>,
    b: Vec<f64>,
    n: usize,
    dist: &'a DisturbanceSpec,
}

impl<'a> Dynamics<'a> {
    pub(crate) fn new(a: &Matrix, b: &[f64], dist: &'a DisturbanceSpec) -> Self {
        Self {
            a: a.as_slice().to_vec(),
            b: b.to_vec(),
            n: b.len(),
            dist,
        }
    }

    #[inline]
    fn deriv(&self, t: f64, x: &[f64], u: f64, out: &mut [f64]) {
        let v = u + self.dist.value(t);
        let n = self.n;
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.a[i * n..(i + 1) * n];
            let mut acc = self.b[i] * v;
            for (aij, xj) in row.iter().zip(x) {
                acc += aij * xj;
            }
            *o = acc;
        }
    }
}

/// Classical fourth-order Runge–Kutta with reusable stage buffers.
#[derive(Debug, Clone)]
pub(crate) struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// One step of size `h` from `(t, x)` with the input held at `u`.
    #[inline]
    pub(crate) fn step(&mut self, f: &Dynamics, t: f64, x: &[f64], h: f64, u: f64, out: &mut [f64]) {
        f.deriv(t, x, u, &mut self.k1);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        f.deriv(t + 0.5 * h, &self.tmp, u, &mut self.k2);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        f.deriv(t + 0.5 * h, &self.tmp, u, &mut self.k3);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        f.deriv(t + h, &self.tmp, u, &mut self.k4);
        for i in 0..x.len() {
            out[i] = x[i] + h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Integrates `ẋ = A x + b (u + d(t))` from `t0` to `t1` with constant `u`
/// on the grid `t0 + k dt`; the last step is shortened to land on `t1`.
#[allow(clippy::too_many_arguments)]
pub fn rk4_integrate(
    a: &Matrix,
    b: &[f64],
    u: f64,
    dist: &DisturbanceSpec,
    x0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    let n = x0.len();
    if a.rows() != n || a.cols() != n || b.len() != n {
        return Err(Error::dim("integrator dimensions disagree"));
    }
    if !(dt > 0.0) || !(t1 >= t0) {
        return Err(Error::contract("need dt > 0 and t1 >= t0"));
    }
    let f = Dynamics::new(a, b, dist);
    let mut rk = Rk4::new(n);
    let mut x = x0.to_vec();
    let mut next = vec![0.0; n];
    let steps = grid_steps(t0, t1, dt);
    let mut t = t0;
    for k in 1..=steps {
        let te = grid_time(t0, t1, dt, k, steps);
        rk.step(&f, t, &x, te - t, u, &mut next);
        std::mem::swap(&mut x, &mut next);
        t = te;
    }
    Ok(x)
}

/// Number of grid steps covering `[t0, t1]`; a trailing fragment shorter
/// than `1e-9 dt` is absorbed.
pub(crate) fn grid_steps(t0: f64, t1: f64, dt: f64) -> u64 {
    (((t1 - t0) / dt) - 1e-9).ceil().max(0.0) as u64
}

#[inline]
pub(crate) fn grid_time(t0: f64, t1: f64, dt: f64, k: u64, steps: u64) -> f64 {
    if k >= steps {
        t1
    } else {
        t0 + k as f64 * dt
    }
}
