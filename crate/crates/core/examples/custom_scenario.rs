//! A scenario written as JSON: a double integrator with a disturbance
//! table, checked, run, and then broken on purpose to show the errors.

use etsmc::scenario::report::DesignReport;
use etsmc::scenario::Scenario;

const SCENARIO: &str = r#"{
  "schema_version": 1,
  "name": "double-integrator",
  "model": { "kind": "matrices", "a": [[0, 1], [0, 0]], "b": [0, 1] },
  "sliding": { "c": [2, 1], "c_hat": [4, 1], "c_check": [1, 1] },
  "etm": { "sigma": 0.2, "beta": 0.3, "n_div": 12, "strategy": "thm3" },
  "gain": { "kind": "state_dependent", "k0": 1.0, "k1": 0.4 },
  "sim": {
    "t_final": 3.0,
    "x0": [2.0, -1.0],
    "disturbance": {
      "signal": { "kind": "table", "times": [0, 1, 2], "values": [0.1, -0.2, 0.05] },
      "d_max": 0.2
    }
  }
}"#;

fn main() -> etsmc::Result<()> {
    let sc = Scenario::from_json(SCENARIO)?;
    println!("{}", DesignReport::new(&sc)?);
    let r = sc.run()?;
    println!(
        "\n{} triggers, switch at {:?}, ‖x(T)‖ = {:.3e}",
        r.summary.trigger_count, r.summary.switch_time, r.summary.final_norm
    );

    let typo = SCENARIO.replace("\"sigma\"", "\"sigmaa\"");
    println!("\ntypo: {}", Scenario::from_json(&typo).unwrap_err());
    let mut unstable = sc.clone();
    unstable.sliding.c_hat = vec![-1.0, 1.0];
    println!("unstable flank: {}", unstable.validate().unwrap_err());
    let mut weak = sc;
    weak.gain = etsmc::controller::GainSchedule::affine(0.3, 0.4);
    println!("weak gain: {}", weak.validate().unwrap_err());
    Ok(())
}
