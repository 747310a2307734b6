//! Colored Jones polynomials of torus knots for the rank-2 algebras.
use torus_tails::jones::{colored_jones, TorusKnot};
use torus_tails::lie::{Algebra, Weight};

fn main() -> torus_tails::Result<()> {
    let trefoil = TorusKnot::new(2, 3)?;
    for alg in Algebra::RANK2 {
        let rs = alg.data();
        for lambda in [Weight([1, 0]), Weight([0, 1])] {
            let j = colored_jones(rs, trefoil, lambda)?;
            println!("{alg} {lambda}: δ* = {}, δ = {}", j.delta_star, j.delta);
            println!("  Ĵ = {}", j.shifted());
        }
    }
    Ok(())
}
