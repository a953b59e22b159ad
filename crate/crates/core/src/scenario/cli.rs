//! Command-line front end. Exit codes: 0 ok, 1 error, 2 a run finished but
//! a monitor or inter-event bound was violated.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use super::export::{read_run_summary, read_trigger_csv, write_run_dir, TRIGGERS_FILE};
use super::report::{run_summary_text, DesignReport, VerificationReport};
use super::{builtin, parse_scenario, ModelSpec, Scenario};
use crate::error::{Error, Result};
use crate::etm::Strategy;
use crate::sim::SimResult;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "etsmc", version, about = "Event-triggered sliding mode control on sliding mode cones")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the surfaces, cone angle and gain, and print the derived constants.
    Design(DesignArgs),
    /// Run the closed loop and write trajectory, triggers and summary files.
    Simulate(SimulateArgs),
    /// Run the closed loop and compare every inter-event time with its bound.
    VerifyBounds(VerifyArgs),
    /// Summarise a run directory written by `simulate`.
    Report(ReportArgs),
    /// List the built-in scenarios.
    List,
    /// Print a scenario as JSON (a starting point for custom files).
    Show(ScenarioArg),
}

#[derive(Debug, Args)]
pub struct ScenarioArg {
    /// Built-in name or path to a scenario JSON file.
    #[arg(value_name = "SCENARIO", required_unless_present = "scenario")]
    pub positional: Option<String>,
    #[arg(long = "scenario", value_name = "SCENARIO", conflicts_with = "positional")]
    pub scenario: Option<String>,
}

impl ScenarioArg {
    fn spec(&self) -> &str {
        self.positional
            .as_deref()
            .or(self.scenario.as_deref())
            .unwrap_or_default()
    }
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// Trigger/law strategy: thm1, thm3 or thm5.
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long, value_name = "SECONDS")]
    pub dt: Option<f64>,
    #[arg(long = "t-final", value_name = "SECONDS")]
    pub t_final: Option<f64>,
    #[arg(long = "refine-tol", value_name = "SECONDS")]
    pub refine_tol: Option<f64>,
    /// Use the 1/omega prefactor in the laws (quadrotor model only).
    #[arg(long = "literal-scaling")]
    pub literal_scaling: bool,
}

impl Overrides {
    pub fn apply(&self, sc: &mut Scenario) -> Result<()> {
        if let Some(s) = &self.strategy {
            sc.etm.strategy = s.parse::<Strategy>()?;
        }
        if let Some(dt) = self.dt {
            sc.sim.dt = dt;
            if sc.sim.refine_tol > dt {
                sc.sim.refine_tol = dt;
            }
        }
        if let Some(t) = self.t_final {
            sc.sim.t_final = t;
        }
        if let Some(tol) = self.refine_tol {
            sc.sim.refine_tol = tol;
        }
        if self.literal_scaling {
            match sc.model {
                ModelSpec::Quadrotor { omega, .. } => sc.prefactor = 1.0 / omega,
                _ => {
                    return Err(Error::Config(
                        "--literal-scaling needs a quadrotor model (it reads omega from it)".into(),
                    ))
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub scenario: ScenarioArg,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in names or scenario files; more than one needs `--batch`.
    #[arg(value_name = "SCENARIO")]
    pub positional: Vec<String>,
    #[arg(long = "scenario", value_name = "SCENARIO")]
    pub scenario: Vec<String>,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Output directory; with `--batch`, one subdirectory per scenario.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Run several scenarios on a worker pool.
    #[arg(long)]
    pub batch: bool,
    /// Worker count for `--batch` (default: one per core).
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Skip the trajectory CSV.
    #[arg(long = "no-trajectory")]
    pub no_trajectory: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArg,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Leading rows of the per-trigger table (failing rows are always added).
    #[arg(long, default_value_t = 20)]
    pub rows: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(value_name = "RUN_DIR")]
    pub run_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub rows: usize,
    #[arg(long)]
    pub json: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Design(a) => design(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::VerifyBounds(a) => verify(a, out),
        Command::Report(a) => report(a, out),
        Command::List => {
            for name in builtin::NAMES {
                let sc = builtin::by_name(name).expect("listed built-in");
                writeln!(out, "{name:<10} n = {}  strategy {}", sc.sim.x0.len(), sc.strategy().as_str())?;
            }
            Ok(EXIT_OK)
        }
        Command::Show(a) => {
            writeln!(out, "{}", parse_scenario(a.spec())?.to_json()?)?;
            Ok(EXIT_OK)
        }
    }
}

fn load(spec: &str, ov: &Overrides) -> Result<Scenario> {
    let mut sc = parse_scenario(spec)?;
    ov.apply(&mut sc)?;
    Ok(sc)
}

fn design(a: DesignArgs, out: &mut dyn Write) -> Result<i32> {
    let sc = load(a.scenario.spec(), &a.overrides)?;
    let rep = DesignReport::new(&sc)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?;
    } else {
        writeln!(out, "{rep}")?;
    }
    Ok(if rep.pass { EXIT_OK } else { EXIT_ERROR })
}

struct Finished {
    name: String,
    dir: PathBuf,
    result: SimResult,
}

fn run_one(mut sc: Scenario, dir: PathBuf, no_trajectory: bool) -> Result<Finished> {
    sc.output.no_trajectory |= no_trajectory;
    let result = sc.run()?;
    write_run_dir(&dir, &sc, &result)?;
    Ok(Finished {
        name: sc.name,
        dir,
        result,
    })
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let specs: Vec<&String> = a.positional.iter().chain(&a.scenario).collect();
    if specs.is_empty() {
        return Err(Error::Config("simulate needs at least one scenario".into()));
    }
    if specs.len() > 1 && !a.batch {
        return Err(Error::Config(
            "several scenarios given; pass --batch to run them together".into(),
        ));
    }
    let mut scenarios = Vec::with_capacity(specs.len());
    for spec in &specs {
        scenarios.push(load(spec, &a.overrides)?);
    }
    let mut names = BTreeSet::new();
    for sc in &scenarios {
        if !names.insert(sc.name.clone()) {
            return Err(Error::Config(format!("scenario name `{}` appears twice", sc.name)));
        }
    }
    let dir_for = |sc: &Scenario| -> PathBuf {
        match (&a.out, a.batch) {
            (Some(d), false) => d.clone(),
            (Some(d), true) => d.join(&sc.name),
            (None, _) => sc
                .output
                .dir
                .as_ref()
                .map(PathBuf::from)
                .unwrap_or_else(|| Path::new("runs").join(&sc.name)),
        }
    };

    let jobs: Vec<(Scenario, PathBuf)> = scenarios
        .into_iter()
        .map(|sc| {
            let d = dir_for(&sc);
            (sc, d)
        })
        .collect();
    let mut done: Vec<(String, Result<Finished>)> = if a.batch {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(a.jobs.unwrap_or(0))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| {
            jobs.into_par_iter()
                .map(|(sc, d)| (sc.name.clone(), run_one(sc, d, a.no_trajectory)))
                .collect()
        })
    } else {
        jobs.into_iter()
            .map(|(sc, d)| (sc.name.clone(), run_one(sc, d, a.no_trajectory)))
            .collect()
    };
    done.sort_by(|x, y| x.0.cmp(&y.0));

    let mut code = EXIT_OK;
    for (name, res) in done {
        match res {
            Ok(f) => {
                let s = &f.result.summary;
                let v = f.result.violation_count();
                writeln!(
                    out,
                    "{}: {} triggers, min dt {}, bound violations {}, monitor violations {}, ‖x(T)‖ = {:.6e} -> {}",
                    f.name,
                    s.trigger_count,
                    s.min_dt.map_or_else(|| "-".into(), |m| format!("{m:.6e}")),
                    s.bound_violations,
                    v,
                    s.final_norm,
                    f.dir.display()
                )?;
                if v > 0 || s.bound_violations > 0 {
                    code = code.max(EXIT_VIOLATION);
                }
            }
            Err(e) if a.batch => {
                writeln!(out, "{name}: error: {e}")?;
                code = EXIT_ERROR;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(code)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let sc = load(a.scenario.spec(), &a.overrides)?;
    let result = sc.run()?;
    let rep = VerificationReport::from_run(&sc.name, &result, a.rows);
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?;
    } else {
        writeln!(out, "{rep}")?;
    }
    Ok(if rep.pass { EXIT_OK } else { EXIT_VIOLATION })
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Result<i32> {
    let run = read_run_summary(&a.run_dir)?;
    let rows = read_trigger_csv(&a.run_dir.join(TRIGGERS_FILE))?;
    let failing = rows.iter().filter(|r| r.pass == Some(false)).count() as u64;
    if rows.len() > run.summary.triggers_logged || failing > run.summary.bound_violations {
        return Err(Error::Config(format!(
            "{} does not match summary.json",
            TRIGGERS_FILE
        )));
    }
    let rep = VerificationReport::from_saved(&run, rows, a.rows);
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?;
    } else {
        writeln!(out, "{}", run_summary_text(&run, &rep))?;
    }
    Ok(EXIT_OK)
}
