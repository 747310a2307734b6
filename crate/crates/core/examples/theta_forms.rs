//! Three expressions for the second T(4,5) numerator series and the tail
//! theta parameters.
use torus_tails::stability::{a1_lattice_form, a1_theta_form, a1_theta_form_with_sign, a1_triple_product_form, tail_theta_params};

fn main() -> torus_tails::Result<()> {
    let order = 40;
    let lattice = a1_lattice_form(5, order);
    let theta = a1_theta_form(order)?;
    let triple = a1_triple_product_form(order)?;
    println!("lattice = {lattice}");
    println!("theta form matches: {}", theta == lattice);
    println!("triple product form matches: {}", triple == lattice);
    println!("theta with ε = +1 agrees: {}", a1_theta_form_with_sign(order, 1)? == lattice);
    for (b, c) in tail_theta_params(11) {
        println!("θ parameters ({b}, {c})");
    }
    Ok(())
}
