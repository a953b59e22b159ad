//! Built-in scenarios with the published parameters.

use std::f64::consts::PI;

use super::{ModelSpec, OutputOptions, Scenario, SlidingSpec, SCHEMA_VERSION};
use crate::controller::GainSchedule;
use crate::etm::{EtmConfig, Strategy};
use crate::plant::DisturbanceSpec;
use crate::sim::SimConfig;

pub const NAMES: [&str; 5] = ["example1", "example2", "example3", "quadrotor", "remark1"];

pub fn by_name(name: &str) -> Option<Scenario> {
    match name {
        "example1" => Some(example1()),
        "example2" => Some(example2()),
        "example3" => Some(example3()),
        "quadrotor" => Some(quadrotor()),
        "remark1" => Some(remark1()),
        _ => None,
    }
}

fn etm(sigma: f64, beta: f64, nu: Option<f64>, n_div: u32, strategy: Strategy) -> EtmConfig {
    EtmConfig {
        sigma,
        beta,
        nu,
        n_div,
        strategy,
        eps_x: 1e-9,
    }
}

fn sliding(c: &[f64], c_hat: &[f64], c_check: &[f64]) -> SlidingSpec {
    SlidingSpec {
        c: c.to_vec(),
        c_hat: c_hat.to_vec(),
        c_check: c_check.to_vec(),
        delta: None,
    }
}

/// Third-order LTI plant under the hybrid trigger, 30 s horizon.
pub fn example1() -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: "example1".into(),
        model: ModelSpec::Matrices {
            a: vec![vec![0.0, 1.0, 0.0], vec![0.0, 2.1, 4.0], vec![-1.0, 2.0, 3.0]],
            b: vec![0.0, 0.0, 1.0],
        },
        sliding: sliding(&[3.6, 2.0, 1.0], &[1.23, 1.2, 1.0], &[7.4, 0.9, 1.0]),
        etm: etm(0.34, 0.48, None, 24, Strategy::Thm1),
        gain: GainSchedule::StateDependent {
            k0: 1.79,
            k1: 0.49,
            k_const: None,
            stated_offset: Some(0.49),
        },
        sim: SimConfig::new(30.0, vec![160.0, 190.0, -150.0], DisturbanceSpec::sinusoid(0.1, 10.0, 0.1)),
        prefactor: 1.0,
        output: OutputOptions::default(),
    }
}

/// Inverted single-arm pendulum, magnitude rule then direction rule, 20 s.
pub fn example2() -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: "example2".into(),
        model: ModelSpec::Pendulum {
            m: 0.1,
            g: 9.8,
            j: 0.15,
            l: 0.3,
        },
        sliding: sliding(&[2.1, 1.0], &[1.32, 1.0], &[4.1, 1.0]),
        etm: etm(0.03, 0.25, None, 23, Strategy::Thm3),
        gain: GainSchedule::affine(0.95, 1.8),
        sim: SimConfig::new(20.0, vec![PI / 3.0, 6.7], DisturbanceSpec::sinusoid(0.1, 10.0, 0.1)),
        prefactor: 1.0,
        output: OutputOptions::default(),
    }
}

fn quadrotor_with(name: &str, model: ModelSpec) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        model,
        sliding: sliding(
            &[0.08, 0.37, 1.89, 1.83, 1.0],
            &[0.14, 0.3, 3.0, 0.84, 1.0],
            &[0.08, 0.97, 2.01, 0.79, 1.0],
        ),
        etm: etm(32.0, 169.0, Some(643.0), 26, Strategy::Thm5),
        gain: GainSchedule::affine(915.0, 35.0),
        sim: SimConfig::new(
            20.0,
            vec![159.0, 133.0, -13.0, -105.0, 102.0],
            DisturbanceSpec::cosine(0.5, 0.08 * PI, 0.5),
        ),
        prefactor: 1.0,
        output: OutputOptions::default(),
    }
}

/// Quadrotor roll channel written out as matrices, practical cone, 20 s.
pub fn example3() -> Scenario {
    quadrotor_with(
        "example3",
        ModelSpec::Matrices {
            a: vec![
                vec![0.0, 1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 9.8, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0, 80.0],
                vec![0.0, 0.0, 0.0, 0.0, -35.0],
            ],
            b: vec![0.0, 0.0, 0.0, 0.0, 35.0],
        },
    )
}

/// Same plant as `example3`, built from the physical parameters.
pub fn quadrotor() -> Scenario {
    quadrotor_with(
        "quadrotor",
        ModelSpec::Quadrotor {
            g: 9.8,
            k_m: 80.0,
            l: 0.3,
            i_xx: 0.6,
            omega: 35.0,
        },
    )
}

/// Second-order design demo. Only the surfaces come from the source; the
/// trigger and gain settings are chosen so the scenario also simulates.
pub fn remark1() -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: "remark1".into(),
        model: ModelSpec::Matrices {
            a: vec![vec![4.0, 6.0], vec![-20.0, 1.0]],
            b: vec![0.0, 1.0],
        },
        sliding: sliding(&[3.0, 1.0], &[5.0, 1.0], &[1.0, 1.0]),
        etm: etm(0.3, 0.5, None, 20, Strategy::Thm1),
        gain: GainSchedule::affine(1.0, 0.5),
        sim: SimConfig::new(10.0, vec![1.0, -1.0], DisturbanceSpec::zero()),
        prefactor: 1.0,
        output: OutputOptions::default(),
    }
}
