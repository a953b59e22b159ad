//! End-to-end runs of the `etsmc` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn etsmc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etsmc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn design_prints_angle_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = etsmc(&["design", "example1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("173π/225"), "{text}");
    assert!(text.contains("stated offset 0.49"));
    assert!(text.contains("verdict: PASS"));
}

#[test]
fn design_json_for_remark1() {
    let dir = tempfile::tempdir().unwrap();
    let o = etsmc(&["design", "--scenario", "remark1", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reduced: Vec<f64> = v["surfaces"]["surfaces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["reduced"][0][0].as_f64().unwrap())
        .collect();
    assert_eq!(reduced, [-14.0, -26.0, -2.0]);
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn simulate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = etsmc(&["simulate", "example1", "--out", "run"], dir.path());
    // Example 1 leaves the ideal cone while sliding, so the cone monitor fires.
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("bound violations 0"));
    let run = dir.path().join("run");
    let traj = std::fs::read_to_string(run.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,x_1,x_2,x_3,u,d,s,s_hat,s_check,mode,in_cone,in_practical_cone\n"));
    let trig = std::fs::read_to_string(run.join("triggers.csv")).unwrap();
    assert!(trig.starts_with("i,t_i,dt_i,rule,rule_set,bound_T_derived,bound_T_printed,pass\n"));
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary"]["bound_violations"], 0);
    let count = summary["summary"]["trigger_count"].as_u64().unwrap();
    assert_eq!(trig.lines().count() as u64, count + 1);

    let o = etsmc(&["report", "run"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains(&format!("triggers {count}")), "{text}");
    assert!(text.contains("verdict: PASS"));
}

#[test]
fn overrides_and_batch_merge_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = etsmc(
        &[
            "simulate", "--batch", "remark1", "example2", "--t-final", "0.5", "--dt", "0.002",
            "--out", "b", "--no-trajectory",
        ],
        dir.path(),
    );
    assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
    let text = stdout(&o);
    let names: Vec<&str> = text.lines().map(|l| l.split(':').next().unwrap()).collect();
    assert_eq!(names, ["example2", "remark1"]);
    for n in names {
        let s: Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("b").join(n).join("summary.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(s["t_final"], 0.5);
        assert_eq!(s["dt"], 0.002);
        assert_eq!(s["trajectory_written"], false);
    }
    assert!(!dir.path().join("b/example2/trajectory.csv").exists());

    let o = etsmc(&["simulate", "remark1", "example2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--batch"));
}

#[test]
fn scenario_files_round_trip_through_show() {
    let dir = tempfile::tempdir().unwrap();
    let o = etsmc(&["show", "example2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(dir.path().join("pend.json"), stdout(&o)).unwrap();
    let o = etsmc(&["verify-bounds", "pend.json", "--t-final", "1", "--rows", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("below bound 0"));
}

#[test]
fn malformed_input_exits_one_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();

    let mut v: Value = serde_json::from_str(&stdout(&etsmc(&["show", "example1"], p))).unwrap();
    v["etm"]["sigmaa"] = 0.3.into();
    std::fs::write(p.join("typo.json"), serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = etsmc(&["design", "typo.json"], p);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("sigmaa") && err.contains("line"), "{err}");

    let mut v: Value = serde_json::from_str(&stdout(&etsmc(&["show", "example1"], p))).unwrap();
    v["sliding"]["c_hat"] = serde_json::json!([-1.0, 1.0, 1.0]);
    std::fs::write(p.join("unstable.json"), v.to_string()).unwrap();
    let o = etsmc(&["simulate", "unstable.json", "--out", "x"], p);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("c_hat"), "{}", stderr(&o));

    std::fs::write(p.join("garbage.json"), "{ not json").unwrap();
    for args in [
        &["design", "garbage.json"][..],
        &["design", "no-such-scenario"],
        &["simulate", "example1", "--dt", "-1"],
        &["simulate", "example1", "--strategy", "thm9"],
        &["simulate", "example1", "--dt", "abc"],
        &["report", "missing-dir"],
        &["design", "example1", "--literal-scaling"],
        &["bogus"],
    ] {
        let o = etsmc(args, p);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).contains("panicked"), "{args:?}");
    }
}

#[test]
fn literal_quadrotor_scaling_fails_design() {
    let dir = tempfile::tempdir().unwrap();
    let o = etsmc(&["design", "quadrotor", "--literal-scaling"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("reaching condition"));
}
