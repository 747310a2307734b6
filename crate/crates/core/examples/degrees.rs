//! Minimal and maximal degrees along a ray, against the quadratic forms, and
//! the fitted quasi-polynomial for δ*.
use torus_tails::jones::{colored_jones, maximizer_bruteforce, minimizer_bruteforce_for, quadratic_forms, TorusKnot};
use torus_tails::lie::{Algebra, Weight};
use torus_tails::stability::degree_quasipoly_fit;

fn main() -> torus_tails::Result<()> {
    let rs = Algebra::B2.data();
    let knot = TorusKnot::new(3, 4)?;
    let ray = Weight([1, 1]);
    let mut deltas = Vec::new();
    println!("{:>3} {:>10} {:>10} {:>10}", "n", "δ*", "f*(μ)", "δ");
    for n in 0..=16 {
        let l = n * ray;
        let j = colored_jones(rs, knot, l)?;
        let qf = quadratic_forms(rs, knot, l);
        let mu = minimizer_bruteforce_for(rs, knot, l)?;
        let (top, _) = maximizer_bruteforce(rs, knot, l)?;
        assert_eq!(qf.f(top), j.delta);
        println!("{n:>3} {:>10} {:>10} {:>10}", j.delta_star, qf.f_star(mu), j.delta);
        deltas.push((n, j.delta_star));
    }
    let fit = degree_quasipoly_fit(&deltas)?;
    println!("δ*(n) = {} for n ≥ {}", fit.qp, fit.threshold);
    Ok(())
}
