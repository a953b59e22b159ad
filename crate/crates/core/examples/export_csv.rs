//! Writes a run directory (trajectory, triggers, summary) and reads the
//! trigger table back.

use etsmc::scenario::builtin;
use etsmc::scenario::export::{read_run_summary, read_trigger_csv, write_run_dir, TRIGGERS_FILE};

fn main() -> etsmc::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("etsmc-example1"));
    let sc = builtin::example1();
    let result = sc.run()?;
    for f in write_run_dir(&dir, &sc, &result)? {
        println!("wrote {}", f.display());
    }

    let summary = read_run_summary(&dir)?;
    let rows = read_trigger_csv(&dir.join(TRIGGERS_FILE))?;
    let failing = rows.iter().filter(|r| r.pass == Some(false)).count();
    println!(
        "{}: {} triggers in the table, {} failing, {} monitor violations",
        summary.scenario,
        rows.len(),
        failing,
        summary.violations
    );
    Ok(())
}
