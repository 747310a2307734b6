//! The two numerator series of the ρ-colored T(4,5) tail.
use torus_tails::stability::tail_closed_t4b;

fn main() -> torus_tails::Result<()> {
    let (a0, a1) = tail_closed_t4b(5, 60)?;
    println!("A0 = {a0}");
    println!("A1 = {a1}");
    Ok(())
}
