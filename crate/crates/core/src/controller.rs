//! Zero-order-hold sliding mode laws, the gain schedule and the mode supervisor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::etm::{rule_set, RuleSet, Strategy};
use crate::geometry::{in_ideal_cone, in_practical_cone, SlidingConfig};
use crate::linalg::{dot, norm, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainSchedule {
    /// `K(x) = k0 + k1‖x‖`. The constant-gain law uses `k_const` when set
    /// and otherwise the schedule itself, evaluated at each trigger.
    StateDependent {
        k0: f64,
        k1: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k_const: Option<f64>,
        /// Offset quoted next to the schedule in the source material, if
        /// any; design reports compare it with the recomputed requirement.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stated_offset: Option<f64>,
    },
    Constant { k: f64 },
}

impl GainSchedule {
    pub fn affine(k0: f64, k1: f64) -> Self {
        GainSchedule::StateDependent {
            k0,
            k1,
            k_const: None,
            stated_offset: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite();
        match *self {
            GainSchedule::StateDependent { k0, k1, k_const, .. } => {
                if !(k0 > 0.0) || !ok(k0) {
                    return Err(Error::validation("gain.k0", "must be finite and positive"));
                }
                if !(k1 >= 0.0) || !ok(k1) {
                    return Err(Error::validation("gain.k1", "must be finite and non-negative"));
                }
                if let Some(k) = k_const {
                    if !(k > 0.0) || !ok(k) {
                        return Err(Error::validation("gain.k_const", "must be finite and positive"));
                    }
                }
            }
            GainSchedule::Constant { k } => {
                if !(k > 0.0) || !ok(k) {
                    return Err(Error::validation("gain.k", "must be finite and positive"));
                }
            }
        }
        Ok(())
    }

    /// Gain at a sampled state of norm `x_norm`.
    #[inline]
    pub fn at_norm(&self, x_norm: f64) -> f64 {
        match *self {
            GainSchedule::StateDependent { k0, k1, .. } => k0 + k1 * x_norm,
            GainSchedule::Constant { k } => k,
        }
    }

    /// Gain of the constant-gain law, if the schedule fixes one.
    pub fn k_const(&self) -> Option<f64> {
        match *self {
            GainSchedule::StateDependent { k_const, .. } => k_const,
            GainSchedule::Constant { k } => Some(k),
        }
    }

    fn offset_slope(&self) -> (f64, f64) {
        match *self {
            GainSchedule::StateDependent { k0, k1, .. } => (k0, k1),
            GainSchedule::Constant { k } => (k, 0.0),
        }
    }
}

pub fn gain_value(g: &GainSchedule, x_last: &[f64]) -> f64 {
    g.at_norm(norm(x_last))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainCheck {
    pub pass: bool,
    /// `|cᵀB| d_max + β`
    pub required_offset: f64,
    pub required_slope: f64,
    /// `min_{‖x‖ ≥ 0} K(x) - (|cᵀB| d_max + σ‖x‖ + β)`; `-inf` when the slope is too small.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stated_offset: Option<f64>,
    pub notes: Vec<String>,
}

/// Whether `K(x) > |cᵀB| d_max + σ‖x‖ + β` for every `‖x‖ ≥ 0`.
pub fn check_gain_condition(
    g: &GainSchedule,
    c: &[f64],
    b: &[f64],
    d_max: f64,
    sigma: f64,
    beta: f64,
) -> GainCheck {
    let cb = dot(c, b).abs();
    let required_offset = cb * d_max + beta;
    let (k0, k1) = g.offset_slope();
    let margin = if k1 >= sigma {
        k0 - required_offset
    } else {
        f64::NEG_INFINITY
    };
    let mut notes = Vec::new();
    if k1 < sigma {
        notes.push(format!(
            "slope {k1} is below sigma = {sigma}: the condition fails for large states"
        ));
    }
    if k0 <= required_offset {
        notes.push(format!(
            "offset {k0} does not exceed |cᵀB| d_max + beta = {required_offset}"
        ));
    }
    let stated_offset = match g {
        GainSchedule::StateDependent { stated_offset, .. } => *stated_offset,
        GainSchedule::Constant { .. } => None,
    };
    if let Some(stated) = stated_offset {
        if (stated - required_offset).abs() > 1e-9 * required_offset.max(1.0) {
            let verdict = if k0 > stated.max(required_offset) {
                "the schedule dominates both"
            } else {
                "the schedule does not dominate both"
            };
            notes.push(format!(
                "stated offset {stated} differs from recomputed |cᵀB| d_max + beta = {required_offset}; {verdict}"
            ));
        }
    }
    GainCheck {
        pass: margin > 0.0,
        required_offset,
        required_slope: sigma,
        margin,
        stated_offset,
        notes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// Switching gain `K(x_i)` from the schedule.
    StateGain,
    /// Constant switching gain.
    ConstantGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Reach,
    Cone,
}

#[inline]
pub fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Both laws with the scenario constants folded in:
/// `u = -p (cᵀB)⁻¹ (cᵀA x_i + K sign s_i)`.
#[derive(Debug, Clone)]
pub struct Controller {
    pub gain: GainSchedule,
    /// `Aᵀc`
    w: Vec<f64>,
    c: Vec<f64>,
    cb: f64,
    prefactor: f64,
}

impl Controller {
    pub fn new(a: &Matrix, b: &[f64], c: &[f64], gain: GainSchedule, prefactor: f64) -> Result<Self> {
        let cb = dot(c, b);
        if cb == 0.0 {
            return Err(Error::Design("cᵀB = 0: the surface does not see the input".into()));
        }
        Ok(Self {
            gain,
            w: a.vecmat(c)?,
            c: c.to_vec(),
            cb,
            prefactor,
        })
    }

    pub fn cb(&self) -> f64 {
        self.cb
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn switching_gain(&self, law: Law, x_norm: f64) -> f64 {
        match law {
            Law::StateGain => self.gain.at_norm(x_norm),
            Law::ConstantGain => self.gain.k_const().unwrap_or_else(|| self.gain.at_norm(x_norm)),
        }
    }

    pub fn input(&self, law: Law, x_last: &[f64]) -> f64 {
        let k = self.switching_gain(law, norm(x_last));
        self.input_with_gain(k, x_last)
    }

    pub fn input_with_gain(&self, k: f64, x_last: &[f64]) -> f64 {
        let s = dot(&self.c, x_last);
        -self.prefactor / self.cb * (dot(&self.w, x_last) + k * sign0(s))
    }
}

pub fn control_law_state_gain(
    a: &Matrix,
    b: &[f64],
    c: &[f64],
    g: &GainSchedule,
    x_last: &[f64],
) -> Result<f64> {
    Ok(Controller::new(a, b, c, g.clone(), 1.0)?.input(Law::StateGain, x_last))
}

pub fn control_law_const(a: &Matrix, b: &[f64], c: &[f64], k: f64, x_last: &[f64]) -> Result<f64> {
    Ok(Controller::new(a, b, c, GainSchedule::Constant { k }, 1.0)?.input_with_gain(k, x_last))
}

/// One-way switch from reaching to cone mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Supervisor {
    pub strategy: Strategy,
    pub mode: Mode,
    pub switch_time: Option<f64>,
}

impl Supervisor {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            mode: Mode::Reach,
            switch_time: None,
        }
    }

    pub fn law(&self) -> Law {
        match (self.strategy, self.mode) {
            (Strategy::Thm1, _) | (_, Mode::Reach) => Law::StateGain,
            _ => Law::ConstantGain,
        }
    }

    pub fn rules(&self) -> RuleSet {
        rule_set(self.strategy, self.mode)
    }

    /// Whether the sample `x` would move the supervisor into cone mode.
    pub fn enters(&self, cfg: &SlidingConfig, x: &[f64]) -> bool {
        if self.mode == Mode::Cone {
            return false;
        }
        match self.strategy {
            Strategy::Thm1 => false,
            Strategy::Thm3 => in_ideal_cone(cfg, x),
            Strategy::Thm5 => in_practical_cone(cfg, x),
        }
    }

    /// Updates the mode from the sample `(t, x)`; returns true on a switch.
    pub fn step(&mut self, cfg: &SlidingConfig, t: f64, x: &[f64]) -> bool {
        let enter = self.enters(cfg, x);
        if enter {
            self.mode = Mode::Cone;
            self.switch_time = Some(t);
        }
        enter
    }
}

/// Mode update plus the law and rules that apply from here on.
pub fn supervisor_step(
    sup: &mut Supervisor,
    cfg: &SlidingConfig,
    t: f64,
    x: &[f64],
) -> (Law, RuleSet) {
    sup.step(cfg, t, x);
    (sup.law(), sup.rules())
}
