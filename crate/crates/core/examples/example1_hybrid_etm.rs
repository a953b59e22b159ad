//! Third-order plant under the hybrid trigger (direction or magnitude,
//! whichever fires first) with the state-dependent gain.

use etsmc::scenario::builtin;

fn main() -> etsmc::Result<()> {
    let sc = builtin::example1();
    let r = sc.run()?;
    let s = &r.summary;
    println!(
        "{} triggers over {} s, ‖x‖: {:.2} -> {:.3e}",
        s.trigger_count, s.final_time, s.initial_norm, s.final_norm
    );
    println!(
        "min Δt {:.3e} s, mean Δt {:.3e} s, asymptotic floor {:.3e} s",
        s.min_dt.unwrap_or(0.0),
        s.mean_dt.unwrap_or(0.0),
        s.asymptotic_floor
    );
    println!("intervals below their bound: {} of {}", s.bound_violations, s.bound_checks);

    println!("\nfirst triggers:");
    for t in r.triggers.iter().take(8) {
        println!(
            "  t = {:8.5}  rule {:<20} u = {:>10.3}  Δt = {:.4e}  bound {:.4e}",
            t.t,
            t.fired.label(),
            t.u,
            t.dt_next.unwrap_or(f64::NAN),
            t.bound_derived.unwrap_or(f64::NAN)
        );
    }
    println!("\nmonitors: {} cone exits after entry at {:?}", r.monitors.cone_violations, s.cone_entry_time);
    Ok(())
}
