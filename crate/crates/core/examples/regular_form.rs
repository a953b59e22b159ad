//! Regular form of the quadrotor roll channel, where the input enters
//! through the fifth state with gain ω.

use etsmc::linalg::Matrix;
use etsmc::plant::to_regular_form;
use etsmc::scenario::builtin;

fn print(name: &str, m: &Matrix) {
    println!("{name}:");
    for row in m.to_nested() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>10.4}")).collect();
        println!("  {}", cells.join(" "));
    }
}

fn main() -> etsmc::Result<()> {
    let (a, b) = builtin::quadrotor().model.matrices()?;
    let model = to_regular_form(&a, &Matrix::column(&b))?;
    println!("controllability rank {}", model.controllability_rank);
    print("T_r", &model.t_r);
    print("A = T_r Ã T_r⁻¹", &model.a);
    println!("T_r B̃ = {:?}", model.t_r.matvec(&b)?);
    print("A11", &model.a11);
    print("A12", &model.a12);
    Ok(())
}
