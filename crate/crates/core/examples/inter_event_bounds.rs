//! Inter-event lower bounds as functions of the state norm at the trigger,
//! both as derived here and in the printed variant.

use etsmc::etm::{asymptotic_floor, bound_t_i1, bound_t_i2, BoundConstants};
use etsmc::scenario::builtin;

fn main() -> etsmc::Result<()> {
    let sc = builtin::example1();
    let built = sc.build()?;
    let (a, b, c) = (&built.model.a_tilde, &built.model.b_tilde, &built.sliding.c);
    let bc = BoundConstants::new(a, b, c, sc.sim.disturbance.d_max, 1.0)?;
    let theta = built.sliding.theta;
    let (n, sigma, beta) = (sc.etm.n_div, sc.etm.sigma, sc.etm.beta);
    println!("rho = {:.4}, ‖A‖ = {:.4}, theta = {theta:.4}", bc.rho, bc.a_norm);

    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "‖x_i‖", "T1", "T1 printed", "T2", "T2 printed");
    for x in [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3, 1e5] {
        let g = bc.drift(sc.gain.at_norm(x));
        let t1 = bound_t_i1(x, theta, n, bc.rho, g, bc.a_norm);
        let t2 = bound_t_i2(x, sigma, beta, bc.c_norm, bc.rho, g, bc.a_norm);
        let show = |v: Option<f64>| v.map_or("vacuous".to_string(), |v| format!("{v:.4e}"));
        println!(
            "{x:>10.0e} {:>12.4e} {:>12} {:>12.4e} {:>12}",
            t1.derived,
            show(t1.printed),
            t2.derived,
            show(t2.printed)
        );
    }
    println!("floor as ‖x_i‖ -> ∞: {:.4e}", asymptotic_floor(theta, n, bc.rho, bc.a_norm));
    Ok(())
}
