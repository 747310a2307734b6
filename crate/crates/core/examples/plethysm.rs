//! Plethysm multiplicities from the summation formula, checked against the
//! Adams-operation oracle, and a quasi-polynomial fit along a ray.
use torus_tails::lie::{Algebra, Weight};
use torus_tails::mult::{plethysm_mult, plethysm_mult_adams_oracle, plethysm_quasipoly_fit, PlethysmQuery};

fn main() -> torus_tails::Result<()> {
    let algebra = Algebra::B2;
    let lambda = Weight([1, 1]);
    for a in 2..=3 {
        for mu in [Weight([0, 0]), Weight([1, 0]), Weight([0, 2]), Weight([a, a])] {
            let q = PlethysmQuery { algebra, lambda, a, mu };
            let m = plethysm_mult(&q)?;
            assert_eq!(m, plethysm_mult_adams_oracle(&q)?);
            println!("{algebra} λ={lambda} a={a} μ={mu}: {m}");
        }
    }
    let rs = Algebra::A2.data();
    let qp = plethysm_quasipoly_fit(rs, Weight([1, 0]), 2, Weight([0, 0]), Weight([0, 1]), 20)?;
    println!("A2 m^(nλ2)_(nλ1,2) = {qp}");
    Ok(())
}
