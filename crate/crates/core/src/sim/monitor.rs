use serde::{Deserialize, Serialize};

use crate::controller::{sign0, Law};
use crate::etm::Strategy;
use crate::linalg::{dot, Matrix};

const MAX_EVENTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationEvent {
    pub t: f64,
    pub kind: String,
    pub magnitude: f64,
}

/// Observational checks collected over a run. Monitors never stop a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    /// First time the state was in the cone the strategy aims for
    /// (ideal cone for thm1/thm3, practical cone for thm5).
    pub cone_entry_time: Option<f64>,
    pub cone_checks: u64,
    pub cone_violations: u64,
    /// Largest `ŝš / (1 + ‖x‖²)` seen after cone entry.
    pub cone_max_excess: f64,
    /// Reaching-phase decrease margin for `V = s²/2`.
    pub xi: f64,
    pub vdot_checks: u64,
    pub vdot_violations: u64,
    /// Largest `sṡ + ξ|s| - 1e-6(1 + |s|)` seen (negative when all checks pass).
    pub vdot_max_excess: f64,
    /// Whether `V₁` uses a common Lyapunov matrix for both cone flanks.
    /// Without one, `V₁` comes from the centre surface and its increases
    /// are reported but not counted as violations.
    pub v1_verified: bool,
    pub v1_checks: u64,
    pub v1_violations: u64,
    pub v1_max_relative_increase: f64,
    pub omega_radius: Option<f64>,
    pub omega_tail_max_norm: Option<f64>,
    pub omega_tail_inside: Option<bool>,
    pub max_abs_d: f64,
    pub events: Vec<ViolationEvent>,
}

impl MonitorReport {
    pub fn violation_count(&self) -> u64 {
        let omega = u64::from(self.omega_tail_inside == Some(false));
        let v1 = if self.v1_verified { self.v1_violations } else { 0 };
        self.cone_violations + self.vdot_violations + v1 + omega
    }
}

/// Per-point values the engine also stores in samples.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointInfo {
    pub s: f64,
    pub s_hat: f64,
    pub s_check: f64,
    pub in_cone: bool,
    pub in_practical: bool,
    pub v1: Option<f64>,
}

pub(crate) struct MonitorSetup {
    pub strategy: Strategy,
    pub c: Vec<f64>,
    pub c_hat: Vec<f64>,
    pub c_check: Vec<f64>,
    pub delta: f64,
    /// `Ãᵀc`
    pub w: Vec<f64>,
    pub cb: f64,
    pub xi: f64,
    pub vdot_enabled: bool,
    pub p_v1: Option<Matrix>,
    pub v1_verified: bool,
    /// `None` when the regular form is the identity transformation.
    pub t_r: Option<Matrix>,
    pub omega_radius: Option<f64>,
    pub tail_start: f64,
}

pub(crate) struct Monitor {
    setup: MonitorSetup,
    pub report: MonitorReport,
    prev_v1: Option<f64>,
    reg: Vec<f64>,
}

impl Monitor {
    pub(crate) fn new(setup: MonitorSetup) -> Self {
        let report = MonitorReport {
            xi: setup.xi,
            v1_verified: setup.v1_verified,
            omega_radius: setup.omega_radius,
            vdot_max_excess: f64::NEG_INFINITY,
            ..MonitorReport::default()
        };
        let n = setup.c.len();
        Self {
            setup,
            report,
            prev_v1: None,
            reg: vec![0.0; n],
        }
    }

    fn event(&mut self, t: f64, kind: &str, magnitude: f64) {
        if self.report.events.len() < MAX_EVENTS {
            self.report.events.push(ViolationEvent {
                t,
                kind: kind.to_string(),
                magnitude,
            });
        }
    }

    fn fill_regular(&mut self, x: &[f64]) {
        match &self.setup.t_r {
            None => self.reg.copy_from_slice(x),
            Some(t) => {
                let n = x.len();
                let tr = t.as_slice();
                for i in 0..n {
                    self.reg[i] = dot(&tr[i * n..(i + 1) * n], x);
                }
            }
        }
    }

    /// Checks one accepted point. `s_i` is the sliding value at the last
    /// trigger, `law` the law currently held.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn observe(
        &mut self,
        t: f64,
        x: &[f64],
        x_norm_sq: f64,
        u: f64,
        d: f64,
        s_i: f64,
        law: Law,
    ) -> PointInfo {
        let su = &self.setup;
        let (strategy, vdot_enabled, xi, cb) = (su.strategy, su.vdot_enabled, su.xi, su.cb);
        let s = dot(&su.c, x);
        let s_hat = dot(&su.c_hat, x);
        let s_check = dot(&su.c_check, x);
        let prod = s_hat * s_check;
        let in_cone = prod <= 0.0;
        let in_practical = in_cone || s.abs() <= su.delta;
        self.report.max_abs_d = self.report.max_abs_d.max(d.abs());

        let target = match strategy {
            Strategy::Thm5 => in_practical,
            _ => in_cone,
        };
        let entered_before = self.report.cone_entry_time.is_some();
        if entered_before {
            self.report.cone_checks += 1;
            let excess = prod / (1.0 + x_norm_sq);
            self.report.cone_max_excess = self.report.cone_max_excess.max(excess);
            let violated = match strategy {
                Strategy::Thm5 => !in_practical,
                _ => excess > 1e-9,
            };
            if violated {
                self.report.cone_violations += 1;
                self.event(t, "cone", excess);
            }
        } else if target {
            self.report.cone_entry_time = Some(t);
        }

        if !entered_before && vdot_enabled && law == Law::StateGain {
            let sg = sign0(s);
            if sg != 0.0 && sg == sign0(s_i) {
                let s_dot = dot(&self.setup.w, x) + cb * (u + d);
                let excess = s * s_dot + xi * s.abs() - 1e-6 * (1.0 + s.abs());
                self.report.vdot_checks += 1;
                self.report.vdot_max_excess = self.report.vdot_max_excess.max(excess);
                if excess > 0.0 {
                    self.report.vdot_violations += 1;
                    self.event(t, "vdot", excess);
                }
            }
        }

        let mut v1 = None;
        if in_cone && self.setup.p_v1.is_some() {
            self.fill_regular(x);
            let m = x.len() - 1;
            let p = self.setup.p_v1.as_ref().expect("checked").as_slice();
            let mut val = 0.0;
            for i in 0..m {
                val += self.reg[i] * dot(&p[i * m..(i + 1) * m], &self.reg[..m]);
            }
            if let (Some(prev), true) = (self.prev_v1, entered_before) {
                self.report.v1_checks += 1;
                let rel = (val - prev) / prev.max(f64::MIN_POSITIVE);
                self.report.v1_max_relative_increase = self.report.v1_max_relative_increase.max(rel);
                if val > prev * (1.0 + 1e-6) + 1e-300 {
                    self.report.v1_violations += 1;
                    self.event(t, "v1", rel);
                }
            }
            v1 = Some(val);
        }
        self.prev_v1 = v1;

        if let Some(radius) = self.setup.omega_radius {
            if t >= self.setup.tail_start {
                self.fill_regular(x);
                let nrm = dot(&self.reg, &self.reg).sqrt();
                let m = self.report.omega_tail_max_norm.get_or_insert(0.0);
                *m = m.max(nrm);
                self.report.omega_tail_inside = Some(*m <= radius);
            }
        }

        PointInfo {
            s,
            s_hat,
            s_check,
            in_cone,
            in_practical,
            v1,
        }
    }

    pub(crate) fn finish(mut self) -> MonitorReport {
        if self.report.vdot_checks == 0 {
            self.report.vdot_max_excess = 0.0;
        }
        if self.report.omega_radius.is_some() && self.report.omega_tail_inside.is_some() {
            let inside = self.report.omega_tail_max_norm.unwrap_or(0.0)
                <= self.report.omega_radius.unwrap_or(f64::INFINITY);
            if !inside {
                self.event(f64::NAN, "omega", self.report.omega_tail_max_norm.unwrap_or(0.0));
            }
        }
        self.report
    }
}
