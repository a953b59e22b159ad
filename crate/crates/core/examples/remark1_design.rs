//! Design checks on the second-order plant with three candidate surfaces.
//!
//! Run with `cargo run --example remark1_design`.

use etsmc::scenario::builtin;
use etsmc::scenario::report::DesignReport;

fn main() -> etsmc::Result<()> {
    let sc = builtin::remark1();
    let report = DesignReport::new(&sc)?;
    println!("{report}");

    // Each surface reduces the plant to a scalar system a11 - a12 c1.
    for s in &report.surfaces.surfaces {
        println!("{:>8}: c1 = {:>4}  ->  {}", s.name, s.c[0], s.reduced[0][0]);
    }
    Ok(())
}
