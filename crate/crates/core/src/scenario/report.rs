//! Design and verification reports, as text and as JSON.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use serde::Serialize;

use super::export::{RunSummary, TriggerRow};
use super::Scenario;
use crate::controller::{check_gain_condition, GainCheck};
use crate::error::Result;
use crate::etm::{asymptotic_floor, BoundConstants, Strategy};
use crate::geometry::{common_cone_lyapunov, omega_bound, validate_surfaces, OmegaBound, SurfaceReport};
use crate::linalg::{dot, norm, Matrix};
use crate::sim::SimResult;

/// `θ/π` as a reduced fraction after rounding `θ` to a tenth of a degree,
/// the precision the published cone angles are quoted at.
pub fn theta_fraction(theta: f64) -> (u64, u64) {
    let tenths = (theta * 1800.0 / PI).round().max(0.0) as u64;
    let g = gcd(tenths, 1800);
    if g == 0 {
        return (0, 1);
    }
    (tenths / g, 1800 / g)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaReport {
    pub radians: f64,
    pub degrees: f64,
    /// `(p, q)` with `θ ≈ pπ/q`.
    pub fraction_of_pi: (u64, u64),
    pub fraction_error: f64,
}

impl ThetaReport {
    pub fn new(theta: f64) -> Self {
        let (p, q) = theta_fraction(theta);
        Self {
            radians: theta,
            degrees: theta.to_degrees(),
            fraction_of_pi: (p, q),
            fraction_error: (theta - p as f64 * PI / q as f64).abs(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PrefactorCheck {
    pub prefactor: f64,
    pub effective_offset: f64,
    pub required_offset: f64,
    pub effective_slope: f64,
    /// `σ + |1 - p| ‖Aᵀc‖ / |cᵀB|`, the uncompensated drift included.
    pub required_slope: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub scenario: String,
    pub strategy: Strategy,
    pub dim: usize,
    pub controllability_rank: usize,
    pub cb: f64,
    pub surfaces: SurfaceReport,
    pub theta: ThetaReport,
    pub delta: f64,
    pub gain: GainCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<PrefactorCheck>,
    pub rho: f64,
    /// Drift constant with the schedule evaluated at `‖x0‖`.
    pub gamma_at_x0: f64,
    /// Drift constant of the constant-gain law, when the schedule fixes one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub a_norm: f64,
    pub asymptotic_floor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<OmegaBound>,
    pub common_cone_lyapunov: bool,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl DesignReport {
    pub fn new(sc: &Scenario) -> Result<Self> {
        let built = sc.build()?;
        let (model, sliding) = (&built.model, &built.sliding);
        let b = &model.b_tilde;
        let a = &model.a_tilde;
        let d_max = sc.sim.disturbance.d_max;
        let surfaces = validate_surfaces(model, sliding);
        let gain = check_gain_condition(&sc.gain, &sliding.c, b, d_max, sc.etm.sigma, sc.etm.beta);
        let bc = BoundConstants::new(a, b, &sliding.c, d_max, sc.prefactor)?;
        let cb = dot(&sliding.c, b);
        let mut notes = gain.notes.clone();

        let prefactor = (sc.prefactor != 1.0).then(|| {
            let p = sc.prefactor;
            let (k0, k1) = match sc.gain {
                crate::controller::GainSchedule::StateDependent { k0, k1, .. } => (k0, k1),
                crate::controller::GainSchedule::Constant { k } => (k, 0.0),
            };
            let w = a.vecmat(&sliding.c).map(|w| norm(&w)).unwrap_or(f64::INFINITY);
            let required_slope = sc.etm.sigma + (1.0 - p).abs() * w / cb.abs();
            let chk = PrefactorCheck {
                prefactor: p,
                effective_offset: p * k0,
                required_offset: gain.required_offset,
                effective_slope: p * k1,
                required_slope,
                pass: p * k0 > gain.required_offset && p * k1 >= required_slope,
            };
            if !chk.pass {
                notes.push(format!(
                    "with prefactor {p} the effective gain {:.6} + {:.6}‖x‖ does not satisfy the reaching condition ({:.6} + {:.6}‖x‖ needed)",
                    chk.effective_offset, chk.effective_slope, chk.required_offset, chk.required_slope
                ));
            }
            chk
        });

        let omega = match (sc.etm.strategy, sc.etm.nu) {
            (Strategy::Thm5, Some(nu)) if surfaces.pass => {
                Some(omega_bound(model, sliding, nu, &Matrix::identity(model.dim() - 1))?)
            }
            _ => None,
        };
        let common = surfaces.pass && common_cone_lyapunov(model, sliding).is_some();
        if surfaces.pass && !common && sc.etm.strategy != Strategy::Thm5 {
            notes.push(
                "no common quadratic Lyapunov matrix found for the two flanking surfaces".into(),
            );
        }
        notes.extend(surfaces.problems.iter().cloned());
        let x0_norm = norm(&sc.sim.x0);
        let pass = surfaces.pass && gain.pass && prefactor.as_ref().is_none_or(|p| p.pass);
        Ok(Self {
            scenario: sc.name.clone(),
            strategy: sc.etm.strategy,
            dim: model.dim(),
            controllability_rank: model.controllability_rank,
            cb,
            theta: ThetaReport::new(sliding.theta),
            delta: sliding.delta,
            gamma_at_x0: bc.drift(sc.gain.at_norm(x0_norm)),
            mu: sc.gain.k_const().map(|k| bc.drift(k)),
            rho: bc.rho,
            a_norm: bc.a_norm,
            asymptotic_floor: asymptotic_floor(sliding.theta, sc.etm.n_div, bc.rho, bc.a_norm),
            surfaces,
            gain,
            prefactor,
            omega,
            common_cone_lyapunov: common,
            notes,
            pass,
        })
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for DesignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "design report: {} (strategy {})", self.scenario, self.strategy.as_str())?;
        writeln!(
            f,
            "  plant: n = {}, controllability rank {}, cᵀB = {:.6}",
            self.dim, self.controllability_rank, self.cb
        )?;
        for s in &self.surfaces.surfaces {
            writeln!(
                f,
                "  surface {:<7} {}  reduced dynamics {}",
                s.name,
                fmt_vec(&s.c),
                if s.hurwitz { "Hurwitz" } else { "NOT Hurwitz" }
            )?;
            for row in &s.reduced {
                writeln!(f, "      {}", fmt_vec(row))?;
            }
        }
        let (p, q) = self.theta.fraction_of_pi;
        writeln!(
            f,
            "  theta = {:.6} rad = {:.4} deg ~ {p}π/{q} (off by {:.1e})",
            self.theta.radians, self.theta.degrees, self.theta.fraction_error
        )?;
        if self.delta > 0.0 {
            writeln!(f, "  practical band delta = {:.6}", self.delta)?;
        }
        writeln!(
            f,
            "  gain condition: {} (margin {:.6}, needs offset > {:.6} and slope >= {:.6})",
            if self.gain.pass { "ok" } else { "FAILS" },
            self.gain.margin,
            self.gain.required_offset,
            self.gain.required_slope
        )?;
        if let Some(pc) = &self.prefactor {
            writeln!(
                f,
                "  prefactor {}: effective gain {:.6} + {:.6}‖x‖ -> {}",
                pc.prefactor,
                pc.effective_offset,
                pc.effective_slope,
                if pc.pass { "ok" } else { "FAILS" }
            )?;
        }
        write!(f, "  rho = {:.6}, gamma(x0) = {:.6}", self.rho, self.gamma_at_x0)?;
        if let Some(mu) = self.mu {
            write!(f, ", mu = {mu:.6}")?;
        }
        writeln!(f, ", ‖A‖ = {:.6}", self.a_norm)?;
        writeln!(f, "  asymptotic inter-event floor = {:.6e} s", self.asymptotic_floor)?;
        if let Some(o) = &self.omega {
            writeln!(f, "  Omega radius = {:.6} (ν in regular units {:.6})", o.radius, o.nu_regular)?;
        }
        writeln!(
            f,
            "  common cone Lyapunov matrix: {}",
            if self.common_cone_lyapunov { "found" } else { "none" }
        )?;
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        write!(f, "  verdict: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Inter-event times against the lower bounds, from a run in memory or on disk.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub strategy: Strategy,
    pub trigger_count: u64,
    pub triggers_logged: usize,
    pub bound_checks: u64,
    pub bound_violations: u64,
    pub min_dt: Option<f64>,
    pub mean_dt: Option<f64>,
    pub min_bound_slack: Option<f64>,
    pub asymptotic_floor: f64,
    pub min_dt_by_decade: Vec<(i32, f64, u64)>,
    /// The first logged intervals followed by any failing ones.
    pub rows: Vec<TriggerRow>,
    pub monitor_violations: u64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn from_run(scenario: &str, result: &SimResult, max_rows: usize) -> Self {
        let rows: Vec<TriggerRow> = result
            .triggers
            .iter()
            .map(|r| TriggerRow {
                i: r.index,
                t: r.t,
                dt: r.dt_next,
                rule: r.fired.label().into(),
                rule_set: r
                    .rules_next
                    .and_then(|rs| serde_json::to_value(rs).ok())
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                bound_derived: r.bound_derived,
                bound_printed: r.bound_printed,
                pass: r.pass,
            })
            .collect();
        Self::assemble(scenario, &result.summary, result.violation_count(), rows, max_rows)
    }

    pub fn from_saved(run: &RunSummary, rows: Vec<TriggerRow>, max_rows: usize) -> Self {
        Self::assemble(&run.scenario, &run.summary, run.violations, rows, max_rows)
    }

    fn assemble(
        scenario: &str,
        s: &crate::sim::Summary,
        monitor_violations: u64,
        rows: Vec<TriggerRow>,
        max_rows: usize,
    ) -> Self {
        let mut shown: Vec<TriggerRow> = rows.iter().take(max_rows).cloned().collect();
        shown.extend(
            rows.iter()
                .skip(max_rows)
                .filter(|r| r.pass == Some(false))
                .take(max_rows)
                .cloned(),
        );
        Self {
            scenario: scenario.into(),
            strategy: s.strategy,
            trigger_count: s.trigger_count,
            triggers_logged: s.triggers_logged,
            bound_checks: s.bound_checks,
            bound_violations: s.bound_violations,
            min_dt: s.min_dt,
            mean_dt: s.mean_dt,
            min_bound_slack: s.min_bound_slack,
            asymptotic_floor: s.asymptotic_floor,
            min_dt_by_decade: s
                .min_dt_by_decade
                .iter()
                .map(|d| (d.decade, d.min_dt, d.count))
                .collect(),
            rows: shown,
            monitor_violations,
            pass: s.bound_violations == 0,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.6e}"))
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "inter-event verification: {} (strategy {})",
            self.scenario,
            self.strategy.as_str()
        )?;
        writeln!(
            f,
            "  triggers {} (logged {}), intervals checked {}, below bound {}",
            self.trigger_count, self.triggers_logged, self.bound_checks, self.bound_violations
        )?;
        writeln!(
            f,
            "  min dt {}  mean dt {}  min slack {}  asymptotic floor {:.6e}",
            opt(self.min_dt),
            opt(self.mean_dt),
            opt(self.min_bound_slack),
            self.asymptotic_floor
        )?;
        if !self.min_dt_by_decade.is_empty() {
            writeln!(f, "  min dt by ‖x_i‖ decade:")?;
            for (d, m, c) in &self.min_dt_by_decade {
                writeln!(f, "    1e{d:<4} {m:.6e}  ({c} intervals)")?;
            }
        }
        let mut table = String::new();
        let _ = writeln!(
            table,
            "  {:>8} {:>14} {:>13} {:<20} {:>13} {:>13} {}",
            "i", "t_i", "dt_i", "rule", "T derived", "T printed", "pass"
        );
        for r in &self.rows {
            let _ = writeln!(
                table,
                "  {:>8} {:>14.9} {:>13} {:<20} {:>13} {:>13} {}",
                r.i,
                r.t,
                opt(r.dt),
                r.rule,
                opt(r.bound_derived),
                opt(r.bound_printed),
                r.pass.map_or("-", |p| if p { "yes" } else { "NO" })
            );
        }
        f.write_str(&table)?;
        if self.monitor_violations > 0 {
            writeln!(f, "  monitor violations: {}", self.monitor_violations)?;
        }
        write!(f, "  verdict: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Text summary of a saved run directory.
pub fn run_summary_text(run: &RunSummary, verification: &VerificationReport) -> String {
    let s = &run.summary;
    let m = &run.monitors;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "run: {} (strategy {}, dt {}, t_final {})",
        run.scenario,
        run.strategy.as_str(),
        run.dt,
        run.t_final
    );
    let _ = writeln!(
        out,
        "  ‖x0‖ = {:.6}, ‖x(T)‖ = {:.6e} at t = {}",
        s.initial_norm, s.final_norm, s.final_time
    );
    if let Some(t) = s.cone_entry_time {
        let _ = writeln!(out, "  first cone entry at t = {t:.6}");
    }
    if let Some(t) = s.switch_time {
        let _ = writeln!(out, "  law switch at t = {t:.6}");
    }
    let _ = writeln!(
        out,
        "  cone monitor: {} of {} checks outside (max excess {:.3e})",
        m.cone_violations, m.cone_checks, m.cone_max_excess
    );
    let _ = writeln!(
        out,
        "  sliding monitor: {} of {} checks above -xi|s| (xi = {:.4})",
        m.vdot_violations, m.vdot_checks, m.xi
    );
    let _ = writeln!(
        out,
        "  V1 monitor ({}): {} increases of {} checks",
        if m.v1_verified { "counted" } else { "informational" },
        m.v1_violations,
        m.v1_checks
    );
    if let (Some(r), Some(tail)) = (m.omega_radius, m.omega_tail_max_norm) {
        let _ = writeln!(out, "  Omega: tail max ‖x‖ {tail:.6} vs radius {r:.6}");
    }
    let _ = writeln!(out, "  total monitor violations: {}", run.violations);
    out.push_str(&verification.to_string());
    out
}
