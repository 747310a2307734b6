//! Kostant partition function by dynamic programming and in closed form.
use torus_tails::kostant::{kostant_closed, kostant_dp};
use torus_tails::lie::Algebra;

fn main() {
    for alg in Algebra::RANK2 {
        let rs = alg.data();
        println!("{alg}");
        for k1 in 0..=4 {
            let row: Vec<String> = (0..=4)
                .map(|k2| {
                    let dp = kostant_dp(rs, [k1, k2]);
                    assert_eq!(kostant_closed(alg, [k1, k2]), Some(dp));
                    format!("{dp:>4}")
                })
                .collect();
            println!("  {}", row.join(""));
        }
    }
}
