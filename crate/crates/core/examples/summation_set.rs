//! The summation set of a plethysm, its lattice hull and the points the
//! hull contains that the set misses.
use torus_tails::lie::{Algebra, Weight};
use torus_tails::mult::{lattice_hull, missing_point_bound_check, missing_points, summation_set};

fn main() -> torus_tails::Result<()> {
    let rs = Algebra::B2.data();
    let (lambda, a) = (Weight([1, 1]), 2);
    let set = summation_set(rs, lambda, a, false)?;
    for (mu, m) in &set {
        println!("{mu}: {m}");
    }
    let hull = lattice_hull(rs, lambda, a);
    println!("hull has {} points", hull.points().len());
    println!("missing: {:?}", missing_points(rs, lambda, a)?);
    let report = missing_point_bound_check(rs, lambda, a, 1..=6)?;
    for row in &report.rows {
        println!("n={} minimizer={} missing={} slack={:?}", row.n, row.minimizer, row.missing, row.min_slack);
    }
    Ok(())
}
