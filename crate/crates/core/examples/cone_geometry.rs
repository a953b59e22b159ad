//! Sliding mode cone of the third-order example: angle, membership and the
//! convex weights of a state between the two flanking surfaces.

use etsmc::geometry::{cone_angle, cone_coordinates, in_ideal_cone, in_practical_cone, SlidingConfig};
use etsmc::linalg::dot;
use etsmc::scenario::report::theta_fraction;

fn main() -> etsmc::Result<()> {
    let cfg = SlidingConfig::new(
        vec![3.6, 2.0, 1.0],
        vec![1.23, 1.2, 1.0],
        vec![7.4, 0.9, 1.0],
        0.05,
    )?;
    let theta = cone_angle(&cfg.c_hat, &cfg.c_check)?;
    let (p, q) = theta_fraction(theta);
    println!("theta = {theta:.6} rad ({:.3} deg, about {p}π/{q})", theta.to_degrees());

    let points: [[f64; 3]; 4] = [
        [1.0, -1.0, -1.5],
        [0.0, 0.0, 0.5],
        [160.0, 190.0, -150.0],
        // On S, yet both flanks agree in sign: the centre surface is not
        // entirely inside the cone for these vectors.
        [0.0, 1.0, -2.0],
    ];
    for x in &points {
        let (s, sh, sc) = (dot(&cfg.c, x), dot(&cfg.c_hat, x), dot(&cfg.c_check, x));
        print!(
            "x = {x:?}: s = {s:+.3}, ŝš = {:+.3}, ideal {}, practical {}",
            sh * sc,
            in_ideal_cone(&cfg, x),
            in_practical_cone(&cfg, x)
        );
        match cone_coordinates(&cfg, x) {
            Ok((l1, l2)) => println!(", weights ({l1:.3}, {l2:.3})"),
            Err(_) => println!(),
        }
    }
    Ok(())
}
