//! Sliding surfaces, the ideal and practical cones, and the Ω region.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    dot, induced_norm2, is_hurwitz, norm, solve_lyapunov, symmetric_eigs, Matrix,
};
use crate::plant::LtiModel;

/// Centre surface `c` and the two flanking surfaces `ĉ`, `č`.
///
/// Vectors are given in the coordinates the plant is simulated in; each
/// ends in an exact 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingConfig {
    pub c: Vec<f64>,
    pub c_hat: Vec<f64>,
    pub c_check: Vec<f64>,
    pub theta: f64,
    pub delta: f64,
}

impl SlidingConfig {
    pub fn new(c: Vec<f64>, c_hat: Vec<f64>, c_check: Vec<f64>, delta: f64) -> Result<Self> {
        let n = c.len();
        if n < 2 {
            return Err(Error::validation("sliding.c", "needs at least two entries"));
        }
        for (name, v) in [("c", &c), ("c_hat", &c_hat), ("c_check", &c_check)] {
            if v.len() != n {
                return Err(Error::validation(
                    format!("sliding.{name}"),
                    format!("has length {}, expected {n}", v.len()),
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation(format!("sliding.{name}"), "entries must be finite"));
            }
            if v[n - 1] != 1.0 {
                return Err(Error::validation(
                    format!("sliding.{name}"),
                    format!("last entry must be exactly 1, got {}", v[n - 1]),
                ));
            }
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::validation("sliding.delta", "must be finite and non-negative"));
        }
        let theta = cone_angle(&c_hat, &c_check)?;
        Ok(Self {
            c,
            c_hat,
            c_check,
            theta,
            delta,
        })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn c1(&self) -> &[f64] {
        &self.c[..self.dim() - 1]
    }

    pub fn c1_hat(&self) -> &[f64] {
        &self.c_hat[..self.dim() - 1]
    }

    pub fn c1_check(&self) -> &[f64] {
        &self.c_check[..self.dim() - 1]
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::validation("sliding.delta", "must be finite and non-negative"));
        }
        self.delta = delta;
        Ok(self)
    }
}

pub fn sliding_value(v: &[f64], x: &[f64]) -> Result<f64> {
    if v.len() != x.len() {
        return Err(Error::contract(format!(
            "surface has length {}, state has length {}",
            v.len(),
            x.len()
        )));
    }
    Ok(dot(v, x))
}

/// `π` minus the angle between `ĉ` and `č`.
///
/// The angle comes from `atan2` of the Lagrange-identity cross norm, so
/// parallel vectors give exactly `π`.
pub fn cone_angle(c_hat: &[f64], c_check: &[f64]) -> Result<f64> {
    if c_hat.len() != c_check.len() {
        return Err(Error::contract("surface vectors differ in length"));
    }
    let (nh, nc) = (norm(c_hat), norm(c_check));
    if nh == 0.0 || nc == 0.0 {
        return Err(Error::contract("cone angle of a zero vector"));
    }
    let mut cross2 = 0.0;
    for i in 0..c_hat.len() {
        for j in i + 1..c_hat.len() {
            let t = c_hat[i] * c_check[j] - c_hat[j] * c_check[i];
            cross2 += t * t;
        }
    }
    Ok(PI - cross2.sqrt().atan2(dot(c_hat, c_check)))
}

/// `ŝ(x) š(x) ≤ 0`.
pub fn in_ideal_cone(cfg: &SlidingConfig, x: &[f64]) -> bool {
    dot(&cfg.c_hat, x) * dot(&cfg.c_check, x) <= 0.0
}

/// Ideal cone or the band `|s(x)| ≤ δ`.
pub fn in_practical_cone(cfg: &SlidingConfig, x: &[f64]) -> bool {
    in_ideal_cone(cfg, x) || dot(&cfg.c, x).abs() <= cfg.delta
}

/// Convex weights with `λ1 ŝ + λ2 š = 0`; `(1/2, 1/2)` at the apex.
pub fn cone_coordinates(cfg: &SlidingConfig, x: &[f64]) -> Result<(f64, f64)> {
    let s_hat = sliding_value(&cfg.c_hat, x)?;
    let s_check = sliding_value(&cfg.c_check, x)?;
    weights(s_hat, s_check)
}

pub(crate) fn weights(s_hat: f64, s_check: f64) -> Result<(f64, f64)> {
    if s_hat * s_check > 0.0 {
        return Err(Error::contract(format!(
            "state is outside the cone (ŝ = {s_hat}, š = {s_check})"
        )));
    }
    if s_hat == s_check {
        return Ok((0.5, 0.5));
    }
    let den = s_check - s_hat;
    Ok((s_check / den, -s_hat / den))
}

/// Surface mapped to regular-form coordinates and normalized so its last
/// entry is 1: `T_r⁻ᵀ c / (cᵀB̃)`.
pub fn regular_surface(model: &LtiModel, c: &[f64]) -> Result<Vec<f64>> {
    let cb = sliding_value(c, &model.b_tilde)?;
    if cb == 0.0 {
        return Err(Error::Design("cᵀB̃ = 0: the surface does not see the input".into()));
    }
    if model.t_r == Matrix::identity(model.dim()) && cb == 1.0 {
        return Ok(c.to_vec());
    }
    let mut v = model.t_r_inv.vecmat(c)?;
    v.iter_mut().for_each(|x| *x /= cb);
    let n = v.len();
    v[n - 1] = 1.0;
    Ok(v)
}

/// `A11 - A12 c1ᵀ` for a regular-form surface `(c1, 1)`.
pub fn reduced_matrix(model: &LtiModel, c_regular: &[f64]) -> Result<Matrix> {
    let m = model.dim() - 1;
    let c1 = Matrix::row_vector(&c_regular[..m]);
    model.a11.sub(&model.a12.matmul(&c1)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceVerdict {
    pub name: String,
    pub c: Vec<f64>,
    pub c_regular: Vec<f64>,
    pub reduced: Vec<Vec<f64>>,
    pub hurwitz: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceReport {
    pub surfaces: Vec<SurfaceVerdict>,
    pub theta: f64,
    pub theta_ok: bool,
    pub pass: bool,
    pub problems: Vec<String>,
}

/// Hurwitz verdict for each reduced closed loop plus the cone angle check.
pub fn validate_surfaces(model: &LtiModel, cfg: &SlidingConfig) -> SurfaceReport {
    let mut problems = Vec::new();
    let mut surfaces = Vec::new();
    if cfg.dim() != model.dim() {
        problems.push(format!(
            "surfaces have length {}, plant has dimension {}",
            cfg.dim(),
            model.dim()
        ));
    } else {
        for (name, v) in [("c", &cfg.c), ("c_hat", &cfg.c_hat), ("c_check", &cfg.c_check)] {
            let verdict = regular_surface(model, v).and_then(|cr| {
                let red = reduced_matrix(model, &cr)?;
                let hurwitz = is_hurwitz(&red)?;
                Ok(SurfaceVerdict {
                    name: name.to_string(),
                    c: v.clone(),
                    c_regular: cr,
                    reduced: red.to_nested(),
                    hurwitz,
                })
            });
            match verdict {
                Ok(sv) => {
                    if !sv.hurwitz {
                        problems.push(format!("surface {name}: reduced dynamics are not Hurwitz"));
                    }
                    surfaces.push(sv);
                }
                Err(e) => problems.push(format!("surface {name}: {e}")),
            }
        }
    }
    let theta_ok = cfg.theta > 0.0 && cfg.theta < PI;
    if !theta_ok {
        problems.push(format!(
            "degenerate cone: theta = {} must lie strictly between 0 and pi",
            cfg.theta
        ));
    }
    SurfaceReport {
        pass: problems.is_empty(),
        surfaces,
        theta: cfg.theta,
        theta_ok,
        problems,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaBound {
    pub radius: f64,
    /// Threshold in regular-form units, `ν / |cᵀB̃|`.
    pub nu_regular: f64,
    pub a_norm: f64,
    pub c1_norm: f64,
    pub p_a12_norm: f64,
    pub lambda_min_q: f64,
    pub p_tilde: Vec<Vec<f64>>,
}

/// Ultimate bound radius for the practical cone, measured on regular-form
/// states `T_r x̃`.
pub fn omega_bound(
    model: &LtiModel,
    cfg: &SlidingConfig,
    nu: f64,
    q_tilde: &Matrix,
) -> Result<OmegaBound> {
    if !(nu > 0.0) {
        return Err(Error::contract("nu must be positive"));
    }
    let cb = sliding_value(&cfg.c, &model.b_tilde)?;
    let c_reg = regular_surface(model, &cfg.c)?;
    let acl = reduced_matrix(model, &c_reg)?;
    let p = solve_lyapunov(&acl, q_tilde)?;
    let lambda_min_q = symmetric_eigs(q_tilde)?.min();
    let a_norm = induced_norm2(&model.a);
    let c1_norm = norm(&c_reg[..model.dim() - 1]);
    let p_a12_norm = induced_norm2(&p.matmul(&model.a12)?);
    let nu_regular = nu / cb.abs();
    let radius = nu_regular / a_norm
        + 2.0 * nu_regular * (1.0 + c1_norm) * p_a12_norm / (lambda_min_q * a_norm);
    Ok(OmegaBound {
        radius,
        nu_regular,
        a_norm,
        c1_norm,
        p_a12_norm,
        lambda_min_q,
        p_tilde: p.to_nested(),
    })
}

/// A single `P` with `MᵀP + PM` negative definite for both flanking reduced
/// matrices, so `x1ᵀPx1` decreases anywhere inside the cone.
///
/// Candidates are the Lyapunov solutions (with `Q = I`) of the three reduced
/// matrices; `None` when none of them works for both flanks.
pub fn common_cone_lyapunov(model: &LtiModel, cfg: &SlidingConfig) -> Option<Matrix> {
    let m = model.dim() - 1;
    let reduced = |c: &[f64]| regular_surface(model, c).and_then(|cr| reduced_matrix(model, &cr));
    let hat = reduced(&cfg.c_hat).ok()?;
    let check = reduced(&cfg.c_check).ok()?;
    let centre = reduced(&cfg.c).ok()?;
    let decreasing = |mtx: &Matrix, p: &Matrix| -> bool {
        let lhs = mtx
            .transpose()
            .matmul(p)
            .and_then(|a| a.add(&p.matmul(mtx)?))
            .map(|s| s.scale(-1.0).symmetrized());
        matches!(lhs.and_then(|s| symmetric_eigs(&s)), Ok(e) if e.min() > 0.0)
    };
    let found = [&centre, &hat, &check].into_iter().find_map(|cand| {
        let p = solve_lyapunov(cand, &Matrix::identity(m)).ok()?;
        (decreasing(&hat, &p) && decreasing(&check, &p)).then_some(p)
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::to_regular_form;

    fn ex1_cfg(delta: f64) -> SlidingConfig {
        SlidingConfig::new(
            vec![3.6, 2.0, 1.0],
            vec![1.23, 1.2, 1.0],
            vec![7.4, 0.9, 1.0],
            delta,
        )
        .unwrap()
    }

    fn remark1() -> (LtiModel, SlidingConfig) {
        let a = Matrix::from_rows(&[&[4.0, 6.0], &[-20.0, 1.0]]).unwrap();
        let model = to_regular_form(&a, &Matrix::column(&[0.0, 1.0])).unwrap();
        let cfg = SlidingConfig::new(vec![3.0, 1.0], vec![5.0, 1.0], vec![1.0, 1.0], 0.0).unwrap();
        (model, cfg)
    }

    #[test]
    fn sliding_values() {
        assert_eq!(sliding_value(&[3.6, 2.0, 1.0], &[0.0; 3]).unwrap(), 0.0);
        let s = sliding_value(&[3.6, 2.0, 1.0], &[1.0; 3]).unwrap();
        assert!((s - 6.6).abs() < 1e-15);
        assert!(sliding_value(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn angles() {
        let t = cone_angle(&[1.23, 1.2, 1.0], &[7.4, 0.9, 1.0]).unwrap();
        assert!((t - 173.0 * PI / 225.0).abs() < 2e-3);
        let t = cone_angle(&[1.32, 1.0], &[4.1, 1.0]).unwrap();
        assert!((t - 87.0 * PI / 100.0).abs() < 2e-3);
        assert_eq!(cone_angle(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), PI);
        assert!(cone_angle(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn cone_membership() {
        let cfg = ex1_cfg(1.0);
        assert!(in_ideal_cone(&cfg, &[0.0; 3]));
        assert!(!in_ideal_cone(&cfg, &[1.0, 0.0, 0.0]));
        assert!(!in_practical_cone(&cfg, &[1.0, 0.0, 0.0]));
        // ŝ = 0 on this point.
        assert!(in_ideal_cone(&cfg, &[1.0, 0.0, -1.23]));
        // |s| ≤ δ but ŝ, š of equal sign.
        let x = [0.0, 0.0, 0.5];
        assert!(dot(&cfg.c_hat, &x) * dot(&cfg.c_check, &x) > 0.0);
        assert!(in_practical_cone(&cfg, &x));
    }

    #[test]
    fn convex_weights() {
        assert_eq!(weights(0.0, 2.0).unwrap(), (1.0, 0.0));
        assert_eq!(weights(-1.5, 1.5).unwrap(), (0.5, 0.5));
        assert_eq!(weights(-1.0, 3.0).unwrap(), (0.75, 0.25));
        assert_eq!(weights(0.0, 0.0).unwrap(), (0.5, 0.5));
        assert!(weights(1.0, 1.0).is_err());
    }

    #[test]
    fn remark1_verdicts() {
        let (model, cfg) = remark1();
        let rep = validate_surfaces(&model, &cfg);
        let values: Vec<f64> = rep.surfaces.iter().map(|s| s.reduced[0][0]).collect();
        assert_eq!(values, vec![-14.0, -26.0, -2.0]);
        assert!(rep.pass);
    }

    #[test]
    fn unstable_surface_fails() {
        let (model, _) = remark1();
        let cfg = SlidingConfig::new(vec![0.0, 1.0], vec![5.0, 1.0], vec![1.0, 1.0], 0.0).unwrap();
        let rep = validate_surfaces(&model, &cfg);
        assert_eq!(rep.surfaces[0].reduced[0][0], 4.0);
        assert!(!rep.surfaces[0].hurwitz);
        assert!(!rep.pass);
    }

    #[test]
    fn coincident_flanks_are_degenerate() {
        let (model, _) = remark1();
        let cfg = SlidingConfig::new(vec![3.0, 1.0], vec![2.0, 1.0], vec![2.0, 1.0], 0.0).unwrap();
        let rep = validate_surfaces(&model, &cfg);
        assert!(!rep.theta_ok && !rep.pass);
    }

    #[test]
    fn omega_for_scalar_reduced_system() {
        let (model, cfg) = remark1();
        let nu = 2.0;
        let om = omega_bound(&model, &cfg, nu, &Matrix::diag(&[28.0])).unwrap();
        assert!((om.p_tilde[0][0] - 1.0).abs() < 1e-14);
        let a_norm = induced_norm2(&model.a);
        let expect = nu / a_norm + 2.0 * nu * (1.0 + 3.0) * 6.0 / (28.0 * a_norm);
        assert!((om.radius - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn last_entry_must_be_one() {
        let r = SlidingConfig::new(vec![1.0, 2.0], vec![1.0, 1.0], vec![2.0, 1.0], 0.0);
        assert!(matches!(r, Err(Error::Validation { .. })));
    }
}
