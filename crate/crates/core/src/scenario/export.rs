//! Run directories: trajectory and trigger CSVs plus a summary JSON.
//!
//! Floating-point columns are written with 17 significant digits so that a
//! reader recovers the exact `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Scenario, SCHEMA_VERSION};
use crate::controller::Mode;
use crate::error::{Error, Result};
use crate::etm::Strategy;
use crate::sim::{MonitorReport, Sample, SimResult, Summary, TriggerRecord};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const TRIGGERS_FILE: &str = "triggers.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Monitor events kept in `summary.json`; the counts cover all of them.
const EVENT_LIMIT: usize = 1000;

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|e| Error::Config(format!("bad number `{field}`: {e}")))
}

fn mode_str(m: Mode) -> &'static str {
    match m {
        Mode::Reach => "reach",
        Mode::Cone => "cone",
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

pub fn write_trajectory_csv<W: Write>(out: W, samples: &[Sample]) -> Result<()> {
    let n = samples.first().map_or(0, |s| s.x.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend(
        ["u", "d", "s", "s_hat", "s_check", "mode", "in_cone", "in_practical_cone"].map(String::from),
    );
    w.write_record(&header).map_err(csv_err)?;
    for s in samples {
        let mut row = vec![fmt_f64(s.t)];
        row.extend(s.x.iter().map(|&v| fmt_f64(v)));
        row.extend([s.u, s.d, s.s, s.s_hat, s.s_check].map(fmt_f64));
        row.push(mode_str(s.mode).into());
        row.push(s.in_cone.to_string());
        row.push(s.in_practical_cone.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of `triggers.csv`. The interval, bound and verdict describe the
/// time from this trigger to the next one; they are empty for the last.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriggerRow {
    pub i: u64,
    pub t: f64,
    pub dt: Option<f64>,
    pub rule: String,
    pub rule_set: String,
    pub bound_derived: Option<f64>,
    pub bound_printed: Option<f64>,
    pub pass: Option<bool>,
}

const TRIGGER_HEADER: [&str; 8] = [
    "i",
    "t_i",
    "dt_i",
    "rule",
    "rule_set",
    "bound_T_derived",
    "bound_T_printed",
    "pass",
];

pub fn write_trigger_csv<W: Write>(out: W, triggers: &[TriggerRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIGGER_HEADER).map_err(csv_err)?;
    for r in triggers {
        let rule_set = r
            .rules_next
            .map(|rs| serde_json::to_value(rs).map(|v| v.as_str().unwrap_or_default().to_string()))
            .transpose()?
            .unwrap_or_default();
        w.write_record([
            r.index.to_string(),
            fmt_f64(r.t),
            fmt_opt(r.dt_next),
            r.fired.label().to_string(),
            rule_set,
            fmt_opt(r.bound_derived),
            fmt_opt(r.bound_printed),
            r.pass.map(|p| p.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trigger_csv(path: &Path) -> Result<Vec<TriggerRow>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRIGGER_HEADER) {
        return Err(Error::Config(format!(
            "{}: unexpected header, expected {}",
            path.display(),
            TRIGGER_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let at = |e: Error| Error::Config(format!("{} row {}: {e}", path.display(), k + 2));
        let i = rec[0]
            .parse::<u64>()
            .map_err(|e| at(Error::Config(e.to_string())))?;
        let t = parse_opt(&rec[1])
            .map_err(at)?
            .ok_or_else(|| Error::Config(format!("{} row {}: missing t_i", path.display(), k + 2)))?;
        let pass = match &rec[7] {
            "" => None,
            "true" => Some(true),
            "false" => Some(false),
            other => return Err(at(Error::Config(format!("bad pass value `{other}`")))),
        };
        rows.push(TriggerRow {
            i,
            t,
            dt: parse_opt(&rec[2]).map_err(at)?,
            rule: rec[3].to_string(),
            rule_set: rec[4].to_string(),
            bound_derived: parse_opt(&rec[5]).map_err(at)?,
            bound_printed: parse_opt(&rec[6]).map_err(at)?,
            pass,
        });
    }
    Ok(rows)
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub scenario: String,
    pub strategy: Strategy,
    pub dt: f64,
    pub t_final: f64,
    pub refine_tol: f64,
    pub trajectory_written: bool,
    pub summary: Summary,
    pub monitors: MonitorReport,
    /// Total monitor violations; the exit status of `simulate` is 2 when non-zero.
    pub violations: u64,
}

impl RunSummary {
    pub fn new(sc: &Scenario, result: &SimResult, trajectory_written: bool) -> Self {
        let mut monitors = result.monitors.clone();
        monitors.events.truncate(EVENT_LIMIT);
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: sc.name.clone(),
            strategy: sc.strategy(),
            dt: sc.sim.dt,
            t_final: sc.sim.t_final,
            refine_tol: sc.sim.refine_tol,
            trajectory_written,
            summary: result.summary.clone(),
            monitors,
            violations: result.violation_count(),
        }
    }
}

/// Writes the run artifacts into `dir`, creating it if needed.
pub fn write_run_dir(dir: &Path, sc: &Scenario, result: &SimResult) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let trajectory = !sc.output.no_trajectory;
    if trajectory {
        let p = dir.join(TRAJECTORY_FILE);
        write_trajectory_csv(std::io::BufWriter::new(fs::File::create(&p)?), &result.samples)?;
        files.push(p);
    }
    let p = dir.join(TRIGGERS_FILE);
    write_trigger_csv(std::io::BufWriter::new(fs::File::create(&p)?), &result.triggers)?;
    files.push(p);
    let p = dir.join(SUMMARY_FILE);
    let summary = RunSummary::new(sc, result, trajectory);
    fs::write(&p, serde_json::to_string_pretty(&summary)?)?;
    files.push(p);
    Ok(files)
}

pub fn read_run_summary(dir: &Path) -> Result<RunSummary> {
    let p = dir.join(SUMMARY_FILE);
    if !p.is_file() {
        return Err(Error::Config(format!("{} not found", p.display())));
    }
    let text = fs::read_to_string(&p)?;
    Ok(serde_json::from_str(&text)?)
}
