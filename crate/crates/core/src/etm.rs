//! Triggering rules, their combinations, and inter-event lower bounds.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::controller::Mode;
use crate::error::{Error, Result};
use crate::linalg::{dot, induced_norm2, norm, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Direction OR magnitude rule, state-dependent gain throughout.
    Thm1,
    /// Magnitude rule until the ideal cone is reached, then direction rule
    /// with the constant-gain law.
    Thm3,
    /// Magnitude rule until the practical cone is reached, then the later of
    /// the direction and practical-magnitude rules with the constant gain.
    Thm5,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Thm1 => "thm1",
            Strategy::Thm3 => "thm3",
            Strategy::Thm5 => "thm5",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "thm1" => Ok(Strategy::Thm1),
            "thm3" => Ok(Strategy::Thm3),
            "thm5" => Ok(Strategy::Thm5),
            other => Err(Error::Config(format!(
                "unknown strategy `{other}` (expected thm1, thm3 or thm5)"
            ))),
        }
    }
}

fn default_eps_x() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtmConfig {
    pub sigma: f64,
    pub beta: f64,
    /// Practical-magnitude threshold; required by `thm5` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    pub n_div: u32,
    pub strategy: Strategy,
    #[serde(default = "default_eps_x")]
    pub eps_x: f64,
}

impl EtmConfig {
    pub fn validate(&self, theta: f64) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::validation(format!("etm.{field}"), msg));
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return bad("sigma", "must be finite and non-negative");
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad("beta", "must be finite and positive");
        }
        if let Some(nu) = self.nu {
            if !(nu > 0.0) || !nu.is_finite() {
                return bad("nu", "must be finite and positive");
            }
        } else if self.strategy == Strategy::Thm5 {
            return bad("nu", "is required by strategy thm5");
        }
        if self.n_div == 0 {
            return bad("n_div", "must be at least 1");
        }
        if !(self.eps_x > 0.0) {
            return bad("eps_x", "must be positive");
        }
        let half = theta / (2.0 * f64::from(self.n_div));
        if !(half > 0.0 && half < FRAC_PI_2) {
            return bad("n_div", "theta / (2 n_div) must lie in (0, pi/2)");
        }
        Ok(())
    }

    pub fn half_angle(&self, theta: f64) -> f64 {
        theta / (2.0 * f64::from(self.n_div))
    }
}

/// Which rules can fire in the current mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleSet {
    /// Direction or magnitude, whichever comes first.
    Hybrid,
    Magnitude,
    Direction,
    /// Direction and practical magnitude, both latched; fires once both have.
    PracticalMax,
}

pub fn rule_set(strategy: Strategy, mode: Mode) -> RuleSet {
    match (strategy, mode) {
        (Strategy::Thm1, _) => RuleSet::Hybrid,
        (_, Mode::Reach) => RuleSet::Magnitude,
        (Strategy::Thm3, Mode::Cone) => RuleSet::Direction,
        (Strategy::Thm5, Mode::Cone) => RuleSet::PracticalMax,
    }
}

/// Rules that were satisfied when a trigger fired.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fired {
    pub direction: bool,
    pub magnitude: bool,
}

impl Fired {
    pub fn any(self) -> bool {
        self.direction || self.magnitude
    }

    pub fn label(self) -> &'static str {
        match (self.direction, self.magnitude) {
            (true, true) => "direction+magnitude",
            (true, false) => "direction",
            (false, true) => "magnitude",
            (false, false) => "initial",
        }
    }
}

/// Per-run trigger bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerState {
    pub t_last: f64,
    pub x_last: Vec<f64>,
    pub x_last_norm: f64,
    /// `cᵀA x_last`, cached so the magnitude rules cost one dot product.
    pub w_x_last: f64,
    pub dir_fired: bool,
    pub mag_fired: bool,
    pub trigger_count: u64,
}

pub fn direction_rule(x: &[f64], x_last: &[f64], theta: f64, n_div: u32, eps_x: f64) -> bool {
    let cos_thr = (theta / (2.0 * f64::from(n_div))).cos();
    direction_fires(dot(x, x_last), norm(x), norm(x_last), cos_thr, eps_x)
}

#[inline]
fn direction_fires(x_dot_last: f64, x_norm: f64, last_norm: f64, cos_thr: f64, eps_x: f64) -> bool {
    if x_norm < eps_x || last_norm < eps_x {
        return false;
    }
    x_dot_last / (x_norm * last_norm) <= cos_thr
}

/// `|cᵀA e| ≥ σ‖x_last‖ + β`.
pub fn magnitude_rule(
    e: &[f64],
    x_last: &[f64],
    c: &[f64],
    a: &Matrix,
    sigma: f64,
    beta: f64,
) -> Result<bool> {
    let w = a.vecmat(c)?;
    Ok(dot(&w, e).abs() >= sigma * norm(x_last) + beta)
}

/// `|cᵀA e| ≥ ν`.
pub fn practical_magnitude_rule(e: &[f64], c: &[f64], a: &Matrix, nu: f64) -> Result<bool> {
    let w = a.vecmat(c)?;
    Ok(dot(&w, e).abs() >= nu)
}

/// Rule evaluator with the per-scenario constants folded in.
#[derive(Debug, Clone)]
pub struct Etm {
    pub cfg: EtmConfig,
    pub theta: f64,
    cos_thr: f64,
    /// `Aᵀc`, so that `cᵀA e = w·e`.
    w: Vec<f64>,
}

impl Etm {
    pub fn new(cfg: EtmConfig, theta: f64, c: &[f64], a: &Matrix) -> Result<Self> {
        cfg.validate(theta)?;
        let w = a.vecmat(c)?;
        Ok(Self {
            cos_thr: cfg.half_angle(theta).cos(),
            cfg,
            theta,
            w,
        })
    }

    pub fn cos_threshold(&self) -> f64 {
        self.cos_thr
    }

    pub fn start(&self, t: f64, x: &[f64]) -> TriggerState {
        TriggerState {
            t_last: t,
            x_last: x.to_vec(),
            x_last_norm: norm(x),
            w_x_last: dot(&self.w, x),
            dir_fired: false,
            mag_fired: false,
            trigger_count: 1,
        }
    }

    /// Records a trigger at `(t, x)`: new reference state, latches cleared.
    pub fn reset(&self, st: &mut TriggerState, t: f64, x: &[f64]) {
        st.t_last = t;
        st.x_last.copy_from_slice(x);
        st.x_last_norm = norm(x);
        st.w_x_last = dot(&self.w, x);
        st.dir_fired = false;
        st.mag_fired = false;
        st.trigger_count += 1;
    }

    /// Raw rule values at `x`: (direction, state-scaled magnitude, practical magnitude).
    #[inline]
    pub fn raw(&self, st: &TriggerState, x: &[f64]) -> (bool, bool, bool) {
        let we = (st.w_x_last - dot(&self.w, x)).abs();
        let dir = direction_fires(
            dot(x, &st.x_last),
            norm(x),
            st.x_last_norm,
            self.cos_thr,
            self.cfg.eps_x,
        );
        let mag = we >= self.cfg.sigma * st.x_last_norm + self.cfg.beta;
        let practical = self.cfg.nu.is_some_and(|nu| we >= nu);
        (dir, mag, practical)
    }

    /// Whether the rules of `set` fire at `x`, without touching the latches.
    #[inline]
    pub fn firing(&self, st: &TriggerState, x: &[f64], set: RuleSet) -> Option<Fired> {
        let (dir, mag, practical) = self.raw(st, x);
        let fired = match set {
            RuleSet::Hybrid => Fired {
                direction: dir,
                magnitude: mag,
            },
            RuleSet::Magnitude => Fired {
                direction: false,
                magnitude: mag,
            },
            RuleSet::Direction => Fired {
                direction: dir,
                magnitude: false,
            },
            RuleSet::PracticalMax => {
                let d = st.dir_fired || dir;
                let m = st.mag_fired || practical;
                if d && m {
                    Fired {
                        direction: true,
                        magnitude: true,
                    }
                } else {
                    Fired::default()
                }
            }
        };
        fired.any().then_some(fired)
    }

    /// Sets the latches of the max combination from the rules holding at `x`.
    pub fn observe(&self, st: &mut TriggerState, x: &[f64], set: RuleSet) {
        if set == RuleSet::PracticalMax {
            let (dir, _, practical) = self.raw(st, x);
            st.dir_fired |= dir;
            st.mag_fired |= practical;
        }
    }

    /// Latch, decide, and on a trigger move the reference to `(t, x)`.
    pub fn should_trigger(
        &self,
        st: &mut TriggerState,
        t: f64,
        x: &[f64],
        set: RuleSet,
    ) -> Option<Fired> {
        self.observe(st, x, set);
        let fired = self.firing(st, x, set)?;
        self.reset(st, t, x);
        Some(fired)
    }
}

/// Norms that enter the inter-event bounds, for a law with prefactor `p`
/// (`u = -p (cᵀB)⁻¹(cᵀA x_i + K sign s_i)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    /// `‖A - p B (cᵀB)⁻¹ cᵀA‖`
    pub rho: f64,
    pub a_norm: f64,
    pub c_norm: f64,
    pub b_norm: f64,
    /// `p ‖B (cᵀB)⁻¹‖`
    pub gain_to_drift: f64,
    pub d_max: f64,
}

impl BoundConstants {
    pub fn new(a: &Matrix, b: &[f64], c: &[f64], d_max: f64, prefactor: f64) -> Result<Self> {
        let cb = dot(c, b);
        if cb == 0.0 {
            return Err(Error::Design("cᵀB = 0: the surface does not see the input".into()));
        }
        let w = a.vecmat(c)?;
        let proj = Matrix::outer(b, &w).scale(prefactor / cb);
        let rho = induced_norm2(&a.sub(&proj)?);
        let b_norm = norm(b);
        Ok(Self {
            rho,
            a_norm: induced_norm2(a),
            c_norm: norm(c),
            b_norm,
            gain_to_drift: prefactor * b_norm / cb.abs(),
            d_max,
        })
    }

    /// Drift constant for switching gain `k`: `γ` for the state gain, `μ` for the constant one.
    pub fn drift(&self, k: f64) -> f64 {
        self.gain_to_drift * k + self.b_norm * self.d_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoGammaMu {
    pub rho: f64,
    pub gamma: f64,
    pub mu: f64,
}

pub fn rho_gamma_mu(
    a: &Matrix,
    b: &[f64],
    c: &[f64],
    k_at: f64,
    k_const: f64,
    d_max: f64,
) -> Result<RhoGammaMu> {
    let bc = BoundConstants::new(a, b, c, d_max, 1.0)?;
    Ok(RhoGammaMu {
        rho: bc.rho,
        gamma: bc.drift(k_at),
        mu: bc.drift(k_const),
    })
}

/// A lower bound from the comparison-lemma derivation, and the variant as
/// printed alongside the theorem when it differs (`None` if vacuous there).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub derived: f64,
    pub printed: Option<f64>,
}

fn log_bound(arg_minus_one: f64, a_norm: f64) -> f64 {
    arg_minus_one.ln_1p() / a_norm
}

/// Time for `‖e‖` to reach `sin(θ/2n)‖x_i‖` under `d‖e‖/dt ≤ ‖A‖‖e‖ + ρ‖x_i‖ + g`.
pub fn bound_t_i1(x_norm: f64, theta: f64, n_div: u32, rho: f64, g: f64, a_norm: f64) -> Bound {
    let sin_half = (theta / (2.0 * f64::from(n_div))).sin();
    let drift = rho * x_norm + g;
    let derived = if x_norm == 0.0 {
        0.0
    } else if drift == 0.0 {
        f64::INFINITY
    } else {
        log_bound(a_norm * sin_half * x_norm / drift, a_norm)
    };
    let printed_arg = sin_half / rho * a_norm - (g / rho) * a_norm / drift;
    let printed = (printed_arg > 0.0 && drift > 0.0).then(|| log_bound(printed_arg, a_norm));
    Bound { derived, printed }
}

/// Time for `|cᵀAe|` to reach `σ‖x_i‖ + β`.
pub fn bound_t_i2(
    x_norm: f64,
    sigma: f64,
    beta: f64,
    c_norm: f64,
    rho: f64,
    g: f64,
    a_norm: f64,
) -> Bound {
    let thr = sigma * x_norm + beta;
    Bound {
        derived: ratio_bound(thr, c_norm * (rho * x_norm + g), a_norm),
        printed: Some(ratio_bound(thr, c_norm * rho * x_norm + g, a_norm)),
    }
}

/// Time for `|cᵀAe|` to reach `ν`.
pub fn bound_t_bar_i2(x_norm: f64, nu: f64, c_norm: f64, rho: f64, g: f64, a_norm: f64) -> Bound {
    Bound {
        derived: ratio_bound(nu, c_norm * (rho * x_norm + g), a_norm),
        printed: Some(ratio_bound(nu, c_norm * rho * x_norm + g, a_norm)),
    }
}

fn ratio_bound(num: f64, den: f64, a_norm: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        log_bound(num / den, a_norm)
    }
}

/// `(T̃_i1, T̄_i2)`: the direction bound with drift `gamma`, the practical
/// magnitude bound with drift `mu`.
#[allow(clippy::too_many_arguments)]
pub fn bound_practical(
    x_norm: f64,
    nu: f64,
    theta: f64,
    n_div: u32,
    c_norm: f64,
    rho: f64,
    gamma: f64,
    mu: f64,
    a_norm: f64,
) -> (Bound, Bound) {
    (
        bound_t_i1(x_norm, theta, n_div, rho, gamma, a_norm),
        bound_t_bar_i2(x_norm, nu, c_norm, rho, mu, a_norm),
    )
}

/// Limit of the direction bound as `‖x_i‖ → ∞`.
pub fn asymptotic_floor(theta: f64, n_div: u32, rho: f64, a_norm: f64) -> f64 {
    let sin_half = (theta / (2.0 * f64::from(n_div))).sin();
    log_bound(a_norm * sin_half / rho, a_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    const THETA1: f64 = 2.4156;

    fn ex1_a() -> Matrix {
        Matrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 2.1, 4.0], &[-1.0, 2.0, 3.0]]).unwrap()
    }

    #[test]
    fn direction_examples() {
        let x = [1.0, 2.0, 3.0];
        assert!(!direction_rule(&x, &x, THETA1, 24, 1e-9));
        assert!(direction_rule(&[0.0, 1.0], &[1.0, 0.0], THETA1, 24, 1e-9));
        let thr = (THETA1 / 48.0).cos();
        assert!((thr - 0.99873).abs() < 1e-5);
        let rotated = [0.06f64.cos(), 0.06f64.sin(), 0.0];
        assert!(direction_rule(&rotated, &[1.0, 0.0, 0.0], THETA1, 24, 1e-9));
        assert!(!direction_rule(&[1e-12, 0.0], &[0.0, 1.0], THETA1, 24, 1e-9));
    }

    #[test]
    fn magnitude_examples() {
        let a = ex1_a();
        let c = [3.6, 2.0, 1.0];
        assert!(!magnitude_rule(&[0.0; 3], &[1.0, 0.0, 0.0], &c, &a, 0.34, 0.48).unwrap());
        let w = a.vecmat(&c).unwrap();
        let wn: f64 = dot(&w, &w);
        let at = |target: f64| -> Vec<f64> { w.iter().map(|v| v * target / wn).collect() };
        assert!(magnitude_rule(&at(0.481), &[0.0; 3], &c, &a, 0.34, 0.48).unwrap());
        let x_last = [10.0, 0.0, 0.0];
        assert!(magnitude_rule(&at(4.0), &x_last, &c, &a, 0.34, 0.48).unwrap());
        assert!(!magnitude_rule(&at(3.8), &x_last, &c, &a, 0.34, 0.48).unwrap());
        assert!(!practical_magnitude_rule(&[0.0; 3], &c, &a, 643.0).unwrap());
        assert!(practical_magnitude_rule(&at(650.0), &c, &a, 643.0).unwrap());
    }

    fn etm(strategy: Strategy) -> Etm {
        let cfg = EtmConfig {
            sigma: 0.34,
            beta: 0.48,
            nu: Some(1.0),
            n_div: 24,
            strategy,
            eps_x: 1e-9,
        };
        Etm::new(cfg, THETA1, &[3.6, 2.0, 1.0], &ex1_a()).unwrap()
    }

    #[test]
    fn nothing_fires_at_the_trigger_instant() {
        for s in [Strategy::Thm1, Strategy::Thm3, Strategy::Thm5] {
            let e = etm(s);
            let x = [160.0, 190.0, -150.0];
            let mut st = e.start(0.0, &x);
            for mode in [Mode::Reach, Mode::Cone] {
                assert!(e.should_trigger(&mut st, 0.0, &x, rule_set(s, mode)).is_none());
            }
        }
    }

    #[test]
    fn hybrid_is_or() {
        let e = etm(Strategy::Thm1);
        let st = e.start(0.0, &[1.0, 0.0, 0.0]);
        // Rotated by 90 degrees with small magnitude change.
        let f = e.firing(&st, &[0.0, 1.0, -2.0], RuleSet::Hybrid).unwrap();
        assert!(f.direction);
    }

    #[test]
    fn practical_max_needs_both_latches() {
        let e = etm(Strategy::Thm5);
        let x0 = [10.0, 0.0, 0.0];
        let mut st = e.start(0.0, &x0);
        let set = RuleSet::PracticalMax;
        // Direction change with |cᵀAe| tiny: only the direction latch sets.
        let w = ex1_a().vecmat(&[3.6, 2.0, 1.0]).unwrap();
        let mut turned = [10.0, 2.0, 0.0];
        let shift = (dot(&w, &x0) - dot(&w, &turned)) / dot(&w, &w);
        for (t, wi) in turned.iter_mut().zip(&w) {
            *t += shift * wi;
        }
        let (dir, _, prac) = e.raw(&st, &turned);
        assert!(dir && !prac);
        assert!(e.should_trigger(&mut st, 0.1, &turned, set).is_none());
        assert!(st.dir_fired && !st.mag_fired);
        // Back along x0 but with a large magnitude error: latched direction completes.
        let ww = dot(&w, &w);
        let back = [10.0 - 2.0 * w[0] / ww, -2.0 * w[1] / ww, -2.0 * w[2] / ww];
        let (dir, _, prac) = e.raw(&st, &back);
        assert!(prac && !dir);
        let fired = e.should_trigger(&mut st, 0.2, &back, set).unwrap();
        assert!(fired.direction && fired.magnitude);
        assert!(!st.dir_fired && !st.mag_fired);
        assert_eq!(st.trigger_count, 2);
    }

    #[test]
    fn rho_for_surface_along_input() {
        let a = ex1_a();
        let r = rho_gamma_mu(&a, &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], 0.0, 0.0, 0.0).unwrap();
        let zeroed = Matrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 2.1, 4.0], &[0.0, 0.0, 0.0]]).unwrap();
        assert!((r.rho - induced_norm2(&zeroed)).abs() < 1e-12);
        assert_eq!(r.gamma, 0.0);
        let r = rho_gamma_mu(&a, &[0.0, 0.0, 1.0], &[3.6, 2.0, 1.0], 2.0, 1.79, 0.1).unwrap();
        assert!((r.gamma - 2.1).abs() < 1e-15);
        assert!((r.mu - 1.89).abs() < 1e-15);
        assert!(rho_gamma_mu(&a, &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bound_shapes() {
        let b = bound_t_i1(0.0, THETA1, 24, 12.0, 2.0, 5.8);
        assert_eq!(b.derived, 0.0);
        assert!(b.printed.is_none());
        let floor = asymptotic_floor(THETA1, 24, 12.0, 5.8);
        let far = bound_t_i1(1e12, THETA1, 24, 12.0, 2.0, 5.8);
        assert!((far.derived - floor).abs() < 1e-12);
        assert!((far.printed.unwrap() - floor).abs() < 1e-12);
        let t2 = bound_t_i2(0.0, 0.34, 0.48, 4.2, 12.0, 2.0, 5.8);
        assert!((t2.derived - (1.0f64 + 0.48 / (4.2 * 2.0)).ln() / 5.8).abs() < 1e-15);
        let (_, tb) = bound_practical(1e9, 1e-12, THETA1, 24, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(tb.derived < 1e-20);
    }

    #[test]
    fn config_validation() {
        let mut cfg = etm(Strategy::Thm5).cfg;
        cfg.nu = None;
        assert!(cfg.validate(THETA1).is_err());
        cfg.strategy = Strategy::Thm1;
        assert!(cfg.validate(THETA1).is_ok());
        cfg.n_div = 1;
        assert!(cfg.validate(3.2).is_err());
        cfg.n_div = 24;
        cfg.beta = 0.0;
        assert!(cfg.validate(THETA1).is_err());
    }
}
