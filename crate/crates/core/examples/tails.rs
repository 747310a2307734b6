//! The three ways of computing a tail: detection from samples, the stable
//! limit at a residue class, and the closed forms.
use torus_tails::jones::TorusKnot;
use torus_tails::lie::{Algebra, Weight};
use torus_tails::stability::{detect_cstability, tail_closed_t2b, tail_eval_stable_limit};

fn main() -> torus_tails::Result<()> {
    let rs = Algebra::A2.data();
    let (b, x_order, q_order) = (5, 2, 15);
    let knot = TorusKnot::new(2, b)?;
    let lambda = Weight([1, 0]);

    let detected = detect_cstability(rs, knot, lambda, 24, x_order, q_order)?;
    println!("detected (threshold n = {}, period {}):\n{}", detected.threshold, detected.period, detected.tail);

    let limit = tail_eval_stable_limit(rs, knot, lambda, 0, x_order, q_order)?;
    println!("stable limit at n ≡ 0:\n{limit}");

    let closed = tail_closed_t2b(b, x_order, q_order)?;
    println!("closed form:\n{closed}");

    match detected.tail.compare(&closed, x_order, q_order) {
        Ok(()) => println!("detect = closed"),
        Err(e) => println!("mismatch: {e}"),
    }
    println!("stable limit = closed: {}", limit.agrees_with(&closed, x_order, q_order));
    Ok(())
}
