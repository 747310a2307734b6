//! The minimizer table against brute force. The disagreements are the known
//! table exceptions for B2 and G2.
use torus_tails::jones::{minimizer_bruteforce, minimizer_closed_form};
use torus_tails::lie::{Algebra, Weight};

fn main() -> torus_tails::Result<()> {
    for alg in Algebra::RANK2 {
        let rs = alg.data();
        let mut bad = 0;
        for a in 2..=5 {
            for l1 in 0..=4 {
                for l2 in 0..=4 {
                    let l = Weight([l1, l2]);
                    let (t, b) = (minimizer_closed_form(rs, l, a)?, minimizer_bruteforce(rs, l, a)?);
                    if t != b {
                        bad += 1;
                        println!("{alg} λ={l} a={a}: table {t}, brute force {b}");
                    }
                }
            }
        }
        println!("{alg}: {bad} disagreements");
    }
    Ok(())
}
