//! Scenario documents, the built-in library, reports, export and the CLI.

pub mod builtin;
pub mod cli;
pub mod export;
pub mod report;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::{check_gain_condition, GainSchedule};
use crate::error::{Error, Result};
use crate::etm::{EtmConfig, Strategy};
use crate::geometry::{validate_surfaces, SlidingConfig};
use crate::linalg::{induced_norm2, Matrix};
use crate::plant::{to_regular_form, LtiModel};
use crate::sim::{simulate_with, EngineOptions, SimConfig, SimResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `ẋ = A x + b (u + d)` with `A` row-major.
    Matrices { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// Linearised single-arm pendulum about the upright position.
    Pendulum { m: f64, g: f64, j: f64, l: f64 },
    /// Linearised roll channel of a quadrotor with a first-order actuator.
    Quadrotor {
        g: f64,
        k_m: f64,
        l: f64,
        i_xx: f64,
        omega: f64,
    },
}

impl ModelSpec {
    pub fn matrices(&self) -> Result<(Matrix, Vec<f64>)> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(format!("model.{name}"), "must be finite and positive"))
            }
        };
        match self {
            ModelSpec::Matrices { a, b } => {
                let n = b.len();
                if a.len() != n || a.iter().any(|r| r.len() != n) {
                    return Err(Error::validation(
                        "model.a",
                        format!("must be {n}x{n} to match b"),
                    ));
                }
                let a = Matrix::from_nested(a)
                    .map_err(|e| Error::validation("model.a", e.to_string()))?;
                if b.iter().any(|v| !v.is_finite()) {
                    return Err(Error::validation("model.b", "entries must be finite"));
                }
                Ok((a, b.clone()))
            }
            &ModelSpec::Pendulum { m, g, j, l } => {
                for (name, v) in [("m", m), ("g", g), ("j", j), ("l", l)] {
                    pos(name, v)?;
                }
                let a = Matrix::from_rows(&[&[0.0, 1.0], &[m * g * l / j, 0.0]])?;
                Ok((a, vec![0.0, l / j]))
            }
            &ModelSpec::Quadrotor {
                g,
                k_m,
                l,
                i_xx,
                omega,
            } => {
                for (name, v) in [("g", g), ("k_m", k_m), ("l", l), ("i_xx", i_xx), ("omega", omega)] {
                    pos(name, v)?;
                }
                let a = Matrix::from_rows(&[
                    &[0.0, 1.0, 0.0, 0.0, 0.0],
                    &[0.0, 0.0, g, 0.0, 0.0],
                    &[0.0, 0.0, 0.0, 1.0, 0.0],
                    &[0.0, 0.0, 0.0, 0.0, 2.0 * k_m * l / i_xx],
                    &[0.0, 0.0, 0.0, 0.0, -omega],
                ])?;
                Ok((a, vec![0.0, 0.0, 0.0, 0.0, omega]))
            }
        }
    }
}

/// Surfaces as written in a scenario; `delta` defaults to `ν/‖Ã‖` when the
/// ETM has a `ν`, otherwise 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlidingSpec {
    pub c: Vec<f64>,
    pub c_hat: Vec<f64>,
    pub c_check: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    /// Default directory for `simulate` artifacts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Skip the trajectory CSV (triggers and summary are always written).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub no_trajectory: bool,
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub model: ModelSpec,
    pub sliding: SlidingSpec,
    pub etm: EtmConfig,
    pub gain: GainSchedule,
    pub sim: SimConfig,
    /// Factor in front of both control laws.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub prefactor: f64,
    #[serde(default, skip_serializing_if = "is_default_output")]
    pub output: OutputOptions,
}

fn is_default_output(o: &OutputOptions) -> bool {
    *o == OutputOptions::default()
}

/// A scenario with its model in regular form and surfaces resolved.
#[derive(Debug, Clone)]
pub struct Built {
    pub model: LtiModel,
    pub sliding: SlidingConfig,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(text)?;
        if sc.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", sc.schema_version),
            ));
        }
        Ok(sc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn strategy(&self) -> Strategy {
        self.etm.strategy
    }

    /// Resolves the model and surfaces, checking dimensions and field
    /// ranges but not the design conditions.
    pub fn build(&self) -> Result<Built> {
        let (a, b) = self.model.matrices()?;
        let n = b.len();
        if self.sliding.c.len() != n {
            return Err(Error::validation(
                "sliding.c",
                format!("has length {}, plant has dimension {n}", self.sliding.c.len()),
            ));
        }
        let model = to_regular_form(&a, &Matrix::column(&b))?;
        let delta = match (self.sliding.delta, self.etm.nu) {
            (Some(d), _) => d,
            (None, Some(nu)) => nu / induced_norm2(&a),
            (None, None) => 0.0,
        };
        let sliding = SlidingConfig::new(
            self.sliding.c.clone(),
            self.sliding.c_hat.clone(),
            self.sliding.c_check.clone(),
            delta,
        )?;
        if !(self.prefactor > 0.0) || !self.prefactor.is_finite() {
            return Err(Error::validation("prefactor", "must be finite and positive"));
        }
        self.gain.validate()?;
        self.etm.validate(sliding.theta)?;
        self.sim.validate(n)?;
        Ok(Built { model, sliding })
    }

    /// `build` plus the design conditions: Hurwitz surfaces, a proper cone
    /// angle and the reaching condition on the gain.
    pub fn validate(&self) -> Result<Built> {
        let built = self.build()?;
        let rep = validate_surfaces(&built.model, &built.sliding);
        if !rep.pass {
            return Err(Error::Design(rep.problems.join("; ")));
        }
        let gc = check_gain_condition(
            &self.gain,
            &built.sliding.c,
            &built.model.b_tilde,
            self.sim.disturbance.d_max,
            self.etm.sigma,
            self.etm.beta,
        );
        if !gc.pass {
            return Err(Error::Design(format!("gain: {}", gc.notes.join("; "))));
        }
        Ok(built)
    }

    pub fn engine_options(&self) -> EngineOptions {
        EngineOptions {
            prefactor: self.prefactor,
            ..EngineOptions::default()
        }
    }

    pub fn run(&self) -> Result<SimResult> {
        let built = self.validate()?;
        simulate_with(
            &built.model,
            &built.sliding,
            &self.etm,
            &self.gain,
            &self.sim,
            &self.engine_options(),
        )
    }
}

/// Reads a scenario from a built-in name or a JSON file and validates it.
pub fn load_scenario(spec: &str) -> Result<Scenario> {
    let sc = parse_scenario(spec)?;
    sc.validate()?;
    Ok(sc)
}

/// Like [`load_scenario`] without the design checks, so that a design
/// report can describe what fails.
pub fn parse_scenario(spec: &str) -> Result<Scenario> {
    if let Some(sc) = builtin::by_name(spec) {
        return Ok(sc);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::Config(format!(
            "'{spec}' is neither a built-in scenario ({}) nor an existing file",
            builtin::NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path)?;
    Scenario::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_round_trip() {
        for name in builtin::NAMES {
            let sc = builtin::by_name(name).unwrap();
            let back = Scenario::from_json(&sc.to_json().unwrap()).unwrap();
            assert_eq!(sc, back, "{name}");
            sc.validate().unwrap();
        }
    }

    #[test]
    fn pendulum_matrices() {
        let (a, b) = builtin::example2().model.matrices().unwrap();
        assert!((a[(1, 0)] - 1.96).abs() < 1e-14);
        assert!((b[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn quadrotor_matches_explicit_matrices() {
        let (a, b) = builtin::quadrotor().model.matrices().unwrap();
        let (a3, b3) = builtin::example3().model.matrices().unwrap();
        assert_eq!(a, a3);
        assert_eq!(b, b3);
    }

    #[test]
    fn unknown_field_is_rejected_with_position() {
        let mut v: serde_json::Value = serde_json::from_str(&builtin::example1().to_json().unwrap()).unwrap();
        v["etm"]["sigmaa"] = serde_json::json!(1.0);
        let err = Scenario::from_json(&serde_json::to_string_pretty(&v).unwrap()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sigmaa") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn non_hurwitz_surface_names_the_surface() {
        let mut sc = builtin::example1();
        sc.sliding.c_hat = vec![-1.0, 1.0, 1.0];
        let err = sc.validate().unwrap_err().to_string();
        assert!(err.contains("c_hat"), "{err}");
    }

    #[test]
    fn wrong_schema_version() {
        let mut sc = builtin::example2();
        sc.schema_version = 2;
        let err = Scenario::from_json(&sc.to_json().unwrap()).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }
}
