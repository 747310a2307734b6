//! Coefficients of Ĵ along a ray and their second differences in n.
use torus_tails::jones::TorusKnot;
use torus_tails::lie::{Algebra, Weight};
use torus_tails::stability::{shifted_family, stable_coefficients};

fn main() -> torus_tails::Result<()> {
    let rs = Algebra::A2.data();
    let knot = TorusKnot::new(2, 3)?;
    let family = shifted_family(rs, knot, Weight([1, 1]), 14)?;
    let sc = stable_coefficients(&family, 8);
    for (n, row) in &sc.rows {
        let row: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        println!("n={n:>2}: {}", row.join(" "));
    }
    let nonzero = sc.second_differences(0..=12);
    println!("nonzero second differences: {}", nonzero.len());
    for (n, k, v) in nonzero.iter().take(5) {
        println!("  n={n} k={k}: {v}");
    }
    Ok(())
}
