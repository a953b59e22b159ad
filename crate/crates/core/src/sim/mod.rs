//! Fixed-step hybrid simulation under zero-order-hold event-triggered control.
//!
//! The plant is integrated in the coordinates the scenario is written in.
//! Trigger rules are checked at the end of every RK4 step; when one fires
//! the instant is bisected down to `refine_tol`, each probe being a single
//! RK4 step from the start of the step.

mod integrate;
mod monitor;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use integrate::rk4_integrate;
pub use monitor::{MonitorReport, ViolationEvent};

use integrate::{grid_steps, grid_time, Dynamics, Rk4};
use monitor::{Monitor, MonitorSetup, PointInfo};

use crate::controller::{check_gain_condition, Controller, GainSchedule, Law, Mode, Supervisor};
use crate::error::{Error, Result};
use crate::etm::{
    asymptotic_floor, bound_t_bar_i2, bound_t_i1, bound_t_i2, Bound, BoundConstants, Etm,
    EtmConfig, Fired, RuleSet, Strategy, TriggerState,
};
use crate::geometry::{
    common_cone_lyapunov, omega_bound, reduced_matrix, regular_surface, validate_surfaces, weights,
    SlidingConfig,
};
use crate::linalg::{dot, solve_lyapunov, Matrix};
use crate::plant::{DisturbanceSpec, LtiModel};

fn default_dt() -> f64 {
    1e-3
}
fn default_refine_tol() -> f64 {
    1e-6
}
fn default_stride() -> u64 {
    10
}
fn default_max_triggers() -> u64 {
    100_000_000
}
fn default_log_limit() -> usize {
    200_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub t0: f64,
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
    pub x0: Vec<f64>,
    pub disturbance: DisturbanceSpec,
    /// Every `record_stride`-th grid point is stored as a sample.
    #[serde(default = "default_stride")]
    pub record_stride: u64,
    /// Hard cap on triggers; reaching it aborts the run as possible Zeno behaviour.
    #[serde(default = "default_max_triggers")]
    pub max_triggers: u64,
    /// Triggers beyond this many are verified and counted but not stored.
    #[serde(default = "default_log_limit")]
    pub trigger_log_limit: usize,
}

impl SimConfig {
    pub fn new(t_final: f64, x0: Vec<f64>, disturbance: DisturbanceSpec) -> Self {
        Self {
            t0: 0.0,
            t_final,
            dt: default_dt(),
            refine_tol: default_refine_tol(),
            x0,
            disturbance,
            record_stride: default_stride(),
            max_triggers: default_max_triggers(),
            trigger_log_limit: default_log_limit(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let span = self.t_final - self.t0;
        if !self.t0.is_finite() || !self.t_final.is_finite() || !(span > 0.0) {
            return Err(Error::validation("sim.t_final", "must be finite and exceed t0"));
        }
        if !(self.dt > 0.0) || self.dt > span {
            return Err(Error::validation("sim.dt", "must lie in (0, t_final - t0]"));
        }
        if !(self.refine_tol > 0.0) || self.refine_tol > self.dt {
            return Err(Error::validation("sim.refine_tol", "must lie in (0, dt]"));
        }
        if self.record_stride == 0 {
            return Err(Error::validation("sim.record_stride", "must be at least 1"));
        }
        if self.x0.len() != n {
            return Err(Error::validation(
                "sim.x0",
                format!("has length {}, plant has dimension {n}", self.x0.len()),
            ));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("sim.x0", "entries must be finite"));
        }
        self.disturbance.validate()
    }
}

/// Knobs that are not part of the scenario proper.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    /// Extra factor in front of both laws; 1 for the standard laws.
    pub prefactor: f64,
    /// Probe ahead with short steps after short inter-event times.
    pub lookahead: bool,
    /// `Q̃` for the Ω radius (identity when `None`).
    pub q_tilde: Option<Matrix>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            prefactor: 1.0,
            lookahead: true,
            q_tilde: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: f64,
    pub d: f64,
    pub s: f64,
    pub s_hat: f64,
    pub s_check: f64,
    pub mode: Mode,
    pub in_cone: bool,
    pub in_practical_cone: bool,
    pub v: f64,
    pub v1: Option<f64>,
    pub lambda: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerRecord {
    pub index: u64,
    pub t: f64,
    pub x: Vec<f64>,
    pub x_norm: f64,
    /// Rules that fired to end the previous interval.
    pub fired: Fired,
    pub mode: Mode,
    pub law: Law,
    pub u: f64,
    /// Filled in when the next trigger arrives.
    pub dt_next: Option<f64>,
    pub rules_next: Option<RuleSet>,
    pub bound_derived: Option<f64>,
    pub bound_printed: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecadeStat {
    /// `floor(log10 ‖x_i‖)` of the state at the start of the interval.
    pub decade: i32,
    pub min_dt: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub strategy: Strategy,
    pub trigger_count: u64,
    pub triggers_logged: usize,
    pub min_dt: Option<f64>,
    pub mean_dt: Option<f64>,
    pub min_dt_by_decade: Vec<DecadeStat>,
    pub bound_checks: u64,
    pub bound_violations: u64,
    /// Smallest `Δt - bound` over all checked intervals.
    pub min_bound_slack: Option<f64>,
    pub asymptotic_floor: f64,
    pub rho: f64,
    pub a_norm: f64,
    pub initial_norm: f64,
    pub final_time: f64,
    pub final_state: Vec<f64>,
    pub final_norm: f64,
    pub cone_entry_time: Option<f64>,
    pub switch_time: Option<f64>,
    pub omega_radius: Option<f64>,
    pub tail_in_omega: Option<bool>,
    pub monitor_violations: u64,
    pub rk4_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub samples: Vec<Sample>,
    pub triggers: Vec<TriggerRecord>,
    pub monitors: MonitorReport,
    pub summary: Summary,
}

impl SimResult {
    /// Monitor violations plus failed inter-event bound checks.
    pub fn violation_count(&self) -> u64 {
        self.monitors.violation_count() + self.summary.bound_violations
    }

    /// Minimum inter-event time over intervals starting at `‖x_i‖ ≥ 10^decade`.
    pub fn min_dt_from_decade(&self, decade: i32) -> Option<f64> {
        self.summary
            .min_dt_by_decade
            .iter()
            .filter(|d| d.decade >= decade)
            .map(|d| d.min_dt)
            .reduce(f64::min)
    }
}

/// Bisects a boolean firing predicate on `[t_a, t_b]` down to width `tol`.
///
/// Returns `t_a` when it already fires there, otherwise the right end of
/// the final bracket.
pub fn refine_trigger_time(
    mut fires: impl FnMut(f64) -> bool,
    t_a: f64,
    t_b: f64,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) || !(t_b >= t_a) {
        return Err(Error::Internal(format!(
            "bad bracket [{t_a}, {t_b}] with tolerance {tol}"
        )));
    }
    if fires(t_a) {
        return Ok(t_a);
    }
    if !fires(t_b) {
        return Err(Error::Internal(format!(
            "bracket invariant violated: no firing at t_b = {t_b}"
        )));
    }
    let (mut a, mut b) = (t_a, t_b);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if fires(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

pub fn simulate(
    model: &LtiModel,
    sliding: &SlidingConfig,
    etm_cfg: &EtmConfig,
    gain: &GainSchedule,
    sim: &SimConfig,
) -> Result<SimResult> {
    simulate_with(model, sliding, etm_cfg, gain, sim, &EngineOptions::default())
}

pub fn simulate_with(
    model: &LtiModel,
    sliding: &SlidingConfig,
    etm_cfg: &EtmConfig,
    gain: &GainSchedule,
    sim: &SimConfig,
    opts: &EngineOptions,
) -> Result<SimResult> {
    let n = model.dim();
    sim.validate(n)?;
    gain.validate()?;
    let report = validate_surfaces(model, sliding);
    if !report.pass {
        return Err(Error::Design(report.problems.join("; ")));
    }
    etm_cfg.validate(sliding.theta)?;
    let b = &model.b_tilde;
    let d_max = sim.disturbance.d_max;
    let gc = check_gain_condition(gain, &sliding.c, b, d_max, etm_cfg.sigma, etm_cfg.beta);
    if !gc.pass {
        return Err(Error::Design(format!(
            "switching gain does not satisfy the reaching condition: {}",
            gc.notes.join("; ")
        )));
    }
    if !(opts.prefactor > 0.0) || !opts.prefactor.is_finite() {
        return Err(Error::Config("prefactor must be finite and positive".into()));
    }

    let omega_radius = match (etm_cfg.strategy, etm_cfg.nu) {
        (Strategy::Thm5, Some(nu)) => {
            let q = opts.q_tilde.clone().unwrap_or_else(|| Matrix::identity(n - 1));
            Some(omega_bound(model, sliding, nu, &q)?.radius)
        }
        _ => None,
    };
    let a = &model.a_tilde;
    let ctrl = Controller::new(a, b, &sliding.c, gain.clone(), opts.prefactor)?;
    let etm = Etm::new(etm_cfg.clone(), sliding.theta, &sliding.c, a)?;
    let bc = BoundConstants::new(a, b, &sliding.c, d_max, opts.prefactor)?;
    let identity = model.t_r == Matrix::identity(n);
    let p_common = common_cone_lyapunov(model, sliding);
    let p_centre = regular_surface(model, &sliding.c)
        .and_then(|cr| reduced_matrix(model, &cr))
        .and_then(|m| solve_lyapunov(&m, &Matrix::identity(n - 1)))
        .ok();
    let monitor = Monitor::new(MonitorSetup {
        strategy: etm_cfg.strategy,
        c: sliding.c.clone(),
        c_hat: sliding.c_hat.clone(),
        c_check: sliding.c_check.clone(),
        delta: sliding.delta,
        w: a.vecmat(&sliding.c)?,
        cb: ctrl.cb(),
        xi: gc.margin,
        vdot_enabled: opts.prefactor == 1.0,
        v1_verified: p_common.is_some(),
        p_v1: p_common.or(p_centre),
        t_r: (!identity).then(|| model.t_r.clone()),
        omega_radius,
        tail_start: sim.t0 + 0.8 * (sim.t_final - sim.t0),
    });

    let mut engine = Engine {
        f: Dynamics::new(a, b, &sim.disturbance),
        rk: Rk4::new(n),
        st: etm.start(sim.t0, &sim.x0),
        sup: Supervisor::new(etm_cfg.strategy),
        etm,
        ctrl,
        bc,
        sliding,
        sim,
        monitor,
        opts,
        u: 0.0,
        law: Law::StateGain,
        s_i: 0.0,
        t: sim.t0,
        x: sim.x0.clone(),
        x_start: vec![0.0; n],
        trial: vec![0.0; n],
        probe: vec![0.0; n],
        last_dt: f64::INFINITY,
        last_info: None,
        triggers: Vec::new(),
        trigger_count: 0,
        sum_dt: 0.0,
        min_dt: f64::INFINITY,
        decades: BTreeMap::new(),
        bound_checks: 0,
        bound_violations: 0,
        min_slack: f64::INFINITY,
        samples: Vec::new(),
        rk4_steps: 0,
        norm_cap: 1e12 * dot(&sim.x0, &sim.x0).sqrt().max(1.0),
    };
    engine.run()?;
    Ok(engine.finish())
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Trigger,
    Entry,
}

struct Engine<'a> {
    f: Dynamics<'a>,
    rk: Rk4,
    etm: Etm,
    ctrl: Controller,
    bc: BoundConstants,
    sup: Supervisor,
    sliding: &'a SlidingConfig,
    sim: &'a SimConfig,
    monitor: Monitor,
    opts: &'a EngineOptions,
    st: TriggerState,
    u: f64,
    law: Law,
    /// Sliding value at the last trigger.
    s_i: f64,
    t: f64,
    x: Vec<f64>,
    x_start: Vec<f64>,
    trial: Vec<f64>,
    probe: Vec<f64>,
    last_dt: f64,
    last_info: Option<(PointInfo, f64)>,
    triggers: Vec<TriggerRecord>,
    trigger_count: u64,
    sum_dt: f64,
    min_dt: f64,
    decades: BTreeMap<i32, (f64, u64)>,
    bound_checks: u64,
    bound_violations: u64,
    min_slack: f64,
    samples: Vec<Sample>,
    rk4_steps: u64,
    norm_cap: f64,
}

impl Engine<'_> {
    fn run(&mut self) -> Result<()> {
        let sim = self.sim;
        let (t0, t1, dt, tol) = (sim.t0, sim.t_final, sim.dt, sim.refine_tol);

        self.sup.step(self.sliding, t0, &self.x);
        self.trigger(t0, Fired::default(), self.sup.rules(), true)?;
        self.accept_point()?;
        self.record_sample();

        let steps = grid_steps(t0, t1, dt);
        let mut h_try = f64::INFINITY;
        for k in 1..=steps {
            let t_end = grid_time(t0, t1, dt, k, steps);
            while self.t < t_end {
                let h = (t_end - self.t).min(h_try);
                let t_try = if h == t_end - self.t { t_end } else { self.t + h };
                self.x_start.copy_from_slice(&self.x);
                let t_start = self.t;
                self.rk.step(&self.f, t_start, &self.x_start, t_try - t_start, self.u, &mut self.trial);
                self.rk4_steps += 1;
                self.check_finite(t_try)?;
                let rules = self.sup.rules();
                if self.etm.firing(&self.st, &self.trial, rules).is_some() {
                    let t_star = self.bisect(t_start, t_try, tol, Event::Trigger);
                    self.x.copy_from_slice(&self.probe);
                    self.t = t_star;
                    let fired = self
                        .etm
                        .firing(&self.st, &self.x, rules)
                        .ok_or_else(|| Error::Internal("refined instant does not fire".into()))?;
                    self.accept_point()?;
                    self.trigger(t_star, fired, rules, false)?;
                    h_try = if self.opts.lookahead {
                        (4.0 * self.last_dt).max(2.0 * tol)
                    } else {
                        f64::INFINITY
                    };
                } else {
                    if self.sup.enters(self.sliding, &self.trial) {
                        // Land the mode switch on the refined entry instant.
                        let t_e = self.bisect(t_start, t_try, tol, Event::Entry);
                        self.x.copy_from_slice(&self.probe);
                        self.t = t_e;
                    } else {
                        std::mem::swap(&mut self.x, &mut self.trial);
                        self.t = t_try;
                    }
                    self.accept_point()?;
                    self.etm.observe(&mut self.st, &self.x, rules);
                    if self.sup.step(self.sliding, self.t, &self.x) {
                        let rules = self.sup.rules();
                        if let Some(fired) = self.etm.firing(&self.st, &self.x, rules) {
                            self.trigger(self.t, fired, rules, false)?;
                        }
                    }
                    h_try *= 4.0;
                }
            }
            if k % sim.record_stride == 0 || k == steps {
                self.record_sample();
            }
        }
        Ok(())
    }

    /// Bisects `[t_start, t_b]` for the first instant where `event` holds;
    /// leaves the state at the returned instant in `probe`.
    fn bisect(&mut self, t_start: f64, t_b: f64, tol: f64, event: Event) -> f64 {
        let rules = self.sup.rules();
        let (mut a, mut b) = (t_start, t_b);
        self.probe.copy_from_slice(&self.trial);
        let mut at_b = self.trial.clone();
        while b - a > tol {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            self.rk.step(&self.f, t_start, &self.x_start, m - t_start, self.u, &mut self.probe);
            self.rk4_steps += 1;
            let hit = match event {
                Event::Trigger => self.etm.firing(&self.st, &self.probe, rules).is_some(),
                Event::Entry => self.sup.enters(self.sliding, &self.probe),
            };
            if hit {
                b = m;
                at_b.copy_from_slice(&self.probe);
            } else {
                a = m;
            }
        }
        self.probe.copy_from_slice(&at_b);
        b
    }

    fn check_finite(&self, t: f64) -> Result<()> {
        let nrm2 = dot(&self.trial, &self.trial);
        if !nrm2.is_finite() || nrm2.sqrt() > self.norm_cap {
            return Err(Error::Diverged {
                t,
                reason: format!("state norm {} left the admissible range", nrm2.sqrt()),
                last_state: self.x.clone(),
            });
        }
        Ok(())
    }

    fn accept_point(&mut self) -> Result<()> {
        let d = self.sim.disturbance.eval(self.t)?;
        let nrm2 = dot(&self.x, &self.x);
        let info = self
            .monitor
            .observe(self.t, &self.x, nrm2, self.u, d, self.s_i, self.law);
        self.last_info = Some((info, d));
        Ok(())
    }

    fn interval_bound(&self, x_norm: f64, rules: RuleSet, fired: Fired) -> Bound {
        let cfg = &self.etm.cfg;
        let bc = &self.bc;
        let g = bc.drift(self.ctrl.switching_gain(self.law, x_norm));
        let t1 = || bound_t_i1(x_norm, self.etm.theta, cfg.n_div, bc.rho, g, bc.a_norm);
        let t2 = || bound_t_i2(x_norm, cfg.sigma, cfg.beta, bc.c_norm, bc.rho, g, bc.a_norm);
        let tb = || {
            bound_t_bar_i2(x_norm, cfg.nu.unwrap_or(0.0), bc.c_norm, bc.rho, g, bc.a_norm)
        };
        let parts: Vec<Bound> = match rules {
            RuleSet::Hybrid => [(fired.direction, t1()), (fired.magnitude, t2())]
                .into_iter()
                .filter_map(|(on, b)| on.then_some(b))
                .collect(),
            RuleSet::Magnitude => vec![t2()],
            RuleSet::Direction => vec![t1()],
            RuleSet::PracticalMax => vec![t1(), tb()],
        };
        Bound {
            derived: parts.iter().map(|b| b.derived).fold(0.0, f64::max),
            printed: parts.iter().filter_map(|b| b.printed).reduce(f64::max),
        }
    }

    fn trigger(&mut self, t: f64, fired: Fired, rules: RuleSet, initial: bool) -> Result<()> {
        let tol = self.sim.refine_tol;
        if !initial {
            let dt_i = t - self.st.t_last;
            let x_norm = self.st.x_last_norm;
            let bound = self.interval_bound(x_norm, rules, fired);
            let slack = dt_i - bound.derived;
            let pass = slack >= -tol;
            self.bound_checks += 1;
            if !pass {
                self.bound_violations += 1;
            }
            self.min_slack = self.min_slack.min(slack);
            self.min_dt = self.min_dt.min(dt_i);
            self.sum_dt += dt_i;
            let decade = x_norm.max(1e-300).log10().floor() as i32;
            let e = self.decades.entry(decade).or_insert((f64::INFINITY, 0));
            e.0 = e.0.min(dt_i);
            e.1 += 1;
            self.last_dt = dt_i;
            if let Some(prev) = self.triggers.last_mut() {
                if prev.index + 1 == self.trigger_count {
                    prev.dt_next = Some(dt_i);
                    prev.rules_next = Some(rules);
                    prev.bound_derived = Some(bound.derived);
                    prev.bound_printed = bound.printed;
                    prev.pass = Some(pass);
                }
            }
        }

        self.sup.step(self.sliding, t, &self.x);
        self.law = self.sup.law();
        let x_norm = dot(&self.x, &self.x).sqrt();
        self.u = self
            .ctrl
            .input_with_gain(self.ctrl.switching_gain(self.law, x_norm), &self.x);
        self.s_i = dot(&self.sliding.c, &self.x);
        if initial {
            self.st = self.etm.start(t, &self.x);
        } else {
            self.etm.reset(&mut self.st, t, &self.x);
        }
        if self.triggers.len() < self.sim.trigger_log_limit {
            self.triggers.push(TriggerRecord {
                index: self.trigger_count,
                t,
                x: self.x.clone(),
                x_norm,
                fired,
                mode: self.sup.mode,
                law: self.law,
                u: self.u,
                dt_next: None,
                rules_next: None,
                bound_derived: None,
                bound_printed: None,
                pass: None,
            });
        }
        self.trigger_count += 1;
        if self.trigger_count > self.sim.max_triggers {
            return Err(Error::Diverged {
                t,
                reason: format!(
                    "trigger cap of {} reached (possible Zeno behaviour)",
                    self.sim.max_triggers
                ),
                last_state: self.x.clone(),
            });
        }
        Ok(())
    }

    fn record_sample(&mut self) {
        let Some((info, d)) = self.last_info else {
            return;
        };
        let lambda = info
            .in_cone
            .then(|| weights(info.s_hat, info.s_check).ok())
            .flatten();
        self.samples.push(Sample {
            t: self.t,
            x: self.x.clone(),
            u: self.u,
            d,
            s: info.s,
            s_hat: info.s_hat,
            s_check: info.s_check,
            mode: self.sup.mode,
            in_cone: info.in_cone,
            in_practical_cone: info.in_practical,
            v: 0.5 * info.s * info.s,
            v1: info.v1,
            lambda,
        });
    }

    fn finish(self) -> SimResult {
        let monitors = self.monitor.finish();
        let intervals = self.trigger_count.saturating_sub(1);
        let cfg = &self.etm.cfg;
        let summary = Summary {
            strategy: cfg.strategy,
            trigger_count: self.trigger_count,
            triggers_logged: self.triggers.len(),
            min_dt: (intervals > 0).then_some(self.min_dt),
            mean_dt: (intervals > 0).then(|| self.sum_dt / intervals as f64),
            min_dt_by_decade: self
                .decades
                .iter()
                .map(|(&decade, &(min_dt, count))| DecadeStat {
                    decade,
                    min_dt,
                    count,
                })
                .collect(),
            bound_checks: self.bound_checks,
            bound_violations: self.bound_violations,
            min_bound_slack: (self.bound_checks > 0).then_some(self.min_slack),
            asymptotic_floor: asymptotic_floor(self.etm.theta, cfg.n_div, self.bc.rho, self.bc.a_norm),
            rho: self.bc.rho,
            a_norm: self.bc.a_norm,
            initial_norm: dot(&self.sim.x0, &self.sim.x0).sqrt(),
            final_time: self.t,
            final_norm: dot(&self.x, &self.x).sqrt(),
            final_state: self.x,
            cone_entry_time: monitors.cone_entry_time,
            switch_time: self.sup.switch_time,
            omega_radius: monitors.omega_radius,
            tail_in_omega: monitors.omega_tail_inside,
            monitor_violations: monitors.violation_count(),
            rk4_steps: self.rk4_steps,
        };
        SimResult {
            samples: self.samples,
            triggers: self.triggers,
            monitors,
            summary,
        }
    }
}
