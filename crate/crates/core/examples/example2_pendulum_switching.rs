//! Inverted pendulum: magnitude rule and state gain until the ideal cone is
//! reached, then the direction rule with the constant-gain law.
//!
//! `cargo run --release --example example2_pendulum_switching [t_final]`;
//! the default horizon is 5 s because triggers become very frequent once
//! the state is near the origin.

use etsmc::scenario::builtin;

fn main() -> etsmc::Result<()> {
    let mut sc = builtin::example2();
    if let Some(t) = std::env::args().nth(1) {
        sc.sim.t_final = t.parse().map_err(|_| etsmc::Error::Config(format!("bad t_final `{t}`")))?;
    } else {
        sc.sim.t_final = 5.0;
    }
    let r = sc.run()?;
    let s = &r.summary;
    println!("switch to cone mode at t = {:?}", s.switch_time);
    let before = r.triggers.iter().filter(|t| s.switch_time.is_none_or(|ts| t.t < ts)).count();
    println!("{} triggers before the switch, {} in total", before, s.trigger_count);
    for d in &s.min_dt_by_decade {
        println!("  ‖x_i‖ ~ 1e{:<3}  min Δt {:.3e}  ({} intervals)", d.decade, d.min_dt, d.count);
    }
    println!("‖x(T)‖ = {:.3e}, cone exits after entry: {}", s.final_norm, r.monitors.cone_violations);
    Ok(())
}
