//! Weight multiplicities, Adams-operation (plethysm) multiplicities and the
//! lattice geometry of the summation set.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jones::minimizer_bruteforce;
use crate::kostant::partition;
use crate::lie::{weights_of_irrep, Algebra, RootSystemData, Weight};
use crate::stability::{fit_quasi_polynomial, QuasiPolynomial};

/// `m_λ^μ` by Kostant's alternating sum.
pub fn weight_mult(rs: &RootSystemData, lambda: Weight, mu: Weight) -> i64 {
    if !rs.in_root_lattice(lambda - mu) {
        return 0;
    }
    let lr = lambda + rs.rho;
    let mut total = 0i64;
    for s in &rs.weyl {
        let arg = s.apply(lr) - mu - rs.rho;
        let rc = rs.to_root_coords(arg).expect("root lattice");
        total += s.sign * partition(rs, rc) as i64;
    }
    total
}

/// Dominant weight multiplicities of `V_λ` from Freudenthal's recursion.
#[derive(Clone, Debug)]
pub struct Character {
    pub lambda: Weight,
    pub dominant: BTreeMap<Weight, i64>,
}

impl Character {
    pub fn mult(&self, rs: &RootSystemData, mu: Weight) -> i64 {
        self.dominant.get(&rs.dominant_conjugate(mu)).copied().unwrap_or(0)
    }

    /// Every weight with its multiplicity.
    pub fn all_weights(&self, rs: &RootSystemData) -> BTreeMap<Weight, i64> {
        let mut out = BTreeMap::new();
        for (nu, m) in &self.dominant {
            for w in rs.orbit_of(*nu) {
                out.insert(w, *m);
            }
        }
        out
    }
}

pub fn freudenthal_character(rs: &RootSystemData, lambda: Weight) -> Character {
    let mut dom = rs.dominant_weights_below(lambda);
    dom.sort_by_key(|w| std::cmp::Reverse(rs.height_num(*w)));
    let lr = lambda + rs.rho;
    let top = rs.inner_num(lr, lr);
    let mut mults: BTreeMap<Weight, i64> = BTreeMap::new();
    for mu in dom {
        if mu == lambda {
            mults.insert(mu, 1);
            continue;
        }
        let mut num = 0i64;
        for a in &rs.positive_roots {
            let mut k = 1;
            loop {
                let w = mu + k * *a;
                let m = mults.get(&rs.dominant_conjugate(w)).copied().unwrap_or(0);
                if m == 0 {
                    break;
                }
                num += rs.inner_num(w, *a) * m;
                k += 1;
            }
        }
        let mr = mu + rs.rho;
        let den = top - rs.inner_num(mr, mr);
        assert!(den > 0 && (2 * num) % den == 0, "Freudenthal recursion is not integral at {}", mu);
        let m = 2 * num / den;
        if m != 0 {
            mults.insert(mu, m);
        }
    }
    Character { lambda, dominant: mults }
}

/// Independent oracle for [`weight_mult`].
pub fn weight_mult_freudenthal(rs: &RootSystemData, lambda: Weight, mu: Weight) -> i64 {
    freudenthal_character(rs, lambda).mult(rs, mu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PlethysmQuery {
    pub algebra: Algebra,
    pub lambda: Weight,
    pub a: i64,
    pub mu: Weight,
}

impl PlethysmQuery {
    pub fn validate(&self) -> Result<()> {
        if self.a < 2 {
            return Err(Error::Invalid(format!("Adams degree a={} must be at least 2", self.a)));
        }
        if !self.lambda.is_dominant() {
            return Err(Error::NotDominant(self.lambda.to_string()));
        }
        let rs = self.algebra.data();
        rs.check_weight(self.lambda)?;
        rs.check_weight(self.mu)
    }
}

/// `m^μ_{λ,a} = Σ_σ (-1)^σ m_λ^{(μ+ρ-σρ)/a}`, skipping non-divisible terms.
pub fn plethysm_mult_in(rs: &RootSystemData, lambda: Weight, a: i64, mu: Weight) -> i64 {
    let mut total = 0;
    for (v, sign) in rs.orbit_table() {
        if let Some(nu) = (mu + *v).div_exact(a) {
            total += sign * weight_mult(rs, lambda, nu);
        }
    }
    total
}

pub fn plethysm_mult(q: &PlethysmQuery) -> Result<i64> {
    q.validate()?;
    Ok(plethysm_mult_in(q.algebra.data(), q.lambda, q.a, q.mu))
}

/// Bound on the number of dominant weights below `aλ` for the Adams oracle.
pub const ORACLE_LIMIT: usize = 20_000;

/// Decomposes `ψ_a(ch_λ)` by repeatedly removing the character of the highest
/// remaining dominant weight. Returns the nonzero coefficients.
pub fn adams_decomposition(rs: &RootSystemData, lambda: Weight, a: i64) -> Result<BTreeMap<Weight, i64>> {
    let top = a * lambda;
    let size = rs.dominant_weights_below(top).len();
    if size > ORACLE_LIMIT {
        return Err(Error::OracleSizeLimit(format!("{} dominant weights", size)));
    }
    let base = freudenthal_character(rs, lambda);
    let mut rest: BTreeMap<Weight, i64> = base.dominant.iter().map(|(nu, m)| (a * *nu, *m)).collect();
    let mut out = BTreeMap::new();
    let mut cache: HashMap<Weight, Character> = HashMap::new();
    loop {
        rest.retain(|_, c| *c != 0);
        let Some(mu) = rest.keys().copied().max_by_key(|w| (rs.height_num(*w), *w)) else {
            break;
        };
        let c = rest[&mu];
        out.insert(mu, c);
        let ch = cache.entry(mu).or_insert_with(|| freudenthal_character(rs, mu));
        for (nu, m) in &ch.dominant {
            *rest.entry(*nu).or_insert(0) -= c * m;
        }
    }
    Ok(out)
}

pub fn plethysm_mult_adams_oracle(q: &PlethysmQuery) -> Result<i64> {
    q.validate()?;
    let rs = q.algebra.data();
    let dec = adams_decomposition(rs, q.lambda, q.a)?;
    let mu = q.mu;
    if !mu.is_dominant() {
        return Ok(0);
    }
    Ok(dec.get(&mu).copied().unwrap_or(0))
}

/// `S_{λ,a}` with multiplicities. Members with multiplicity zero are kept
/// when `keep_zero` is set.
pub fn summation_set(rs: &RootSystemData, lambda: Weight, a: i64, keep_zero: bool) -> Result<BTreeMap<Weight, i64>> {
    let pi = weights_of_irrep(rs, lambda)?;
    let mut pts: BTreeSet<Weight> = BTreeSet::new();
    for (v, _) in rs.orbit_table() {
        for nu in &pi {
            let mu = a * *nu - *v;
            if mu.is_dominant() {
                pts.insert(mu);
            }
        }
    }
    let mut out = BTreeMap::new();
    for mu in pts {
        let m = plethysm_mult_in(rs, lambda, a, mu);
        if keep_zero || m != 0 {
            out.insert(mu, m);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeHull {
    pub algebra: Algebra,
    pub lambda: Weight,
    pub a: i64,
    /// Base points `aλ + σρ - ρ`.
    pub translates: Vec<Weight>,
}

impl LatticeHull {
    /// Membership in `∪_σ (aλ + σρ - ρ + aΛ_r)`.
    pub fn contains(&self, mu: Weight) -> bool {
        let rs = self.algebra.data();
        self.translates.iter().any(|t| match rs.to_root_coords(mu - *t) {
            Some(rc) => rc[0] % self.a == 0 && rc[1] % self.a == 0,
            None => false,
        })
    }

    /// `μ ∈ P_{aλ}`: dominant with `(aλ - μ, λ_i) ≥ 0`.
    pub fn in_polytope(&self, mu: Weight) -> bool {
        let rs = self.algebra.data();
        if !mu.is_dominant() {
            return false;
        }
        let d = self.a * self.lambda - mu;
        (0..rs.rank()).all(|i| {
            let mut e = Weight::ZERO;
            e.0[i] = 1;
            rs.inner_num(d, e) >= 0
        })
    }

    /// Dominant points of `P_{aλ}` (a box enumeration cut by the inequalities).
    pub fn polytope_points(&self) -> Vec<Weight> {
        let rs = self.algebra.data();
        let top = self.a * self.lambda;
        let h = rs.height_num(top);
        let bound = |i: usize| {
            let mut e = Weight::ZERO;
            e.0[i] = 1;
            h / rs.height_num(e)
        };
        let b0 = bound(0);
        let b1 = if rs.rank() == 2 { bound(1) } else { 0 };
        let mut out = Vec::new();
        for x in 0..=b0 {
            for y in 0..=b1 {
                let mu = Weight([x, y]);
                if self.in_polytope(mu) {
                    out.push(mu);
                }
            }
        }
        out
    }

    /// `𝓛_{λ,a} ∩ P_{aλ}`.
    pub fn points(&self) -> Vec<Weight> {
        self.polytope_points().into_iter().filter(|m| self.contains(*m)).collect()
    }
}

pub fn lattice_hull(rs: &RootSystemData, lambda: Weight, a: i64) -> LatticeHull {
    let mut translates: Vec<Weight> = rs.weyl.iter().map(|s| a * lambda + s.apply(rs.rho) - rs.rho).collect();
    translates.sort();
    translates.dedup();
    LatticeHull { algebra: rs.algebra, lambda, a, translates }
}

/// `R_{λ,a} = (𝓛_{λ,a} ∩ P_{aλ}) \ S_{λ,a}`.
pub fn missing_points(rs: &RootSystemData, lambda: Weight, a: i64) -> Result<BTreeSet<Weight>> {
    let s = summation_set(rs, lambda, a, true)?;
    let hull = lattice_hull(rs, lambda, a);
    Ok(hull.points().into_iter().filter(|m| !s.contains_key(m)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub n: i64,
    pub minimizer: Weight,
    pub missing: usize,
    /// Smallest `(μ̂,μ̂) + 2(μ̂,μ_{nλ,a}) - n²` over the missing points.
    pub min_slack: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub algebra: Algebra,
    pub lambda: Weight,
    pub a: i64,
    pub rows: Vec<BoundRow>,
}

/// Checks `(μ̂,μ̂) + 2(μ̂,μ_{nλ,a}) ≥ n²` on every missing point for each `n`,
/// with `μ_{nλ,a}` the brute-force minimizer.
pub fn missing_point_bound_check(
    rs: &RootSystemData,
    lambda: Weight,
    a: i64,
    ns: impl IntoIterator<Item = i64>,
) -> Result<BoundReport> {
    if rs.rank() != 2 {
        return Err(Error::UnsupportedAlgebra(rs.algebra.to_string()));
    }
    let mut rows = Vec::new();
    for n in ns {
        let nl = n * lambda;
        let mn = minimizer_bruteforce(rs, nl, a)?;
        let r = missing_points(rs, nl, a)?;
        let mut min_slack: Option<BigRational> = None;
        for mu in &r {
            let hat = *mu - mn;
            let lhs = rs.inner_big(hat, hat) + rs.inner_big(hat, mn) * BigRational::from_integer(BigInt::from(2));
            let slack = lhs - BigRational::from_integer(BigInt::from(n * n));
            if slack < BigRational::from_integer(BigInt::from(0)) {
                return Err(Error::BoundViolation(format!(
                    "{} λ={} a={} n={} μ={} slack={}",
                    rs.algebra, lambda, a, n, mu, slack
                )));
            }
            if min_slack.as_ref().is_none_or(|s| slack < *s) {
                min_slack = Some(slack);
            }
        }
        rows.push(BoundRow { n, minimizer: mn, missing: r.len(), min_slack: min_slack.map(|s| s.to_string()) });
    }
    Ok(BoundReport { algebra: rs.algebra, lambda, a, rows })
}

/// Fits `n ↦ m^{μ̂+nν}_{nλ,a}` for `0 ≤ n ≤ n_max` by a quasi-polynomial.
pub fn plethysm_quasipoly_fit(
    rs: &RootSystemData,
    lambda: Weight,
    a: i64,
    mu_hat: Weight,
    nu: Weight,
    n_max: i64,
) -> Result<QuasiPolynomial> {
    if rs.rank() != 2 {
        return Err(Error::UnsupportedAlgebra(rs.algebra.to_string()));
    }
    let samples: Vec<(i64, BigRational)> = (0..=n_max)
        .map(|n| {
            let m = plethysm_mult_in(rs, n * lambda, a, mu_hat + n * nu);
            (n, BigRational::from_integer(BigInt::from(m)))
        })
        .collect();
    fit_quasi_polynomial(&samples, 2).map(|f| f.qp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, ToPrimitive, Zero};
    use proptest::prelude::*;

    fn w(a: i64, b: i64) -> Weight {
        Weight([a, b])
    }

    #[test]
    fn highest_weight_has_multiplicity_one() {
        for alg in Algebra::ALL {
            let rs = alg.data();
            for m1 in 0..4 {
                for m2 in 0..4 {
                    let l = if alg == Algebra::A1 { w(m1, 0) } else { w(m1, m2) };
                    assert_eq!(weight_mult(rs, l, l), 1);
                    assert_eq!(weight_mult_freudenthal(rs, l, l), 1);
                }
            }
        }
    }

    #[test]
    fn adjoint_zero_weight() {
        let a2 = Algebra::A2.data();
        assert_eq!(weight_mult(a2, w(1, 1), Weight::ZERO), 2);
        assert_eq!(weight_mult_freudenthal(a2, w(1, 1), Weight::ZERO), 2);
        let b2 = Algebra::B2.data();
        assert_eq!(weight_mult(b2, w(1, 1), Weight::ZERO), weight_mult_freudenthal(b2, w(1, 1), Weight::ZERO));
        assert_eq!(weight_mult(Algebra::G2.data(), w(1, 0), Weight::ZERO), 1);
        assert_eq!(weight_mult(Algebra::G2.data(), w(0, 1), Weight::ZERO), 2);
    }

    #[test]
    fn kostant_matches_freudenthal() {
        for alg in Algebra::ALL {
            let rs = alg.data();
            for m1 in 0..=6 {
                for m2 in 0..=(6 - m1) {
                    if alg == Algebra::A1 && m2 > 0 {
                        continue;
                    }
                    let l = w(m1, m2);
                    let ch = freudenthal_character(rs, l);
                    let all = ch.all_weights(rs);
                    for (mu, m) in &all {
                        assert_eq!(weight_mult(rs, l, *mu), *m, "{} {} {}", alg, l, mu);
                    }
                    let total: i64 = all.values().sum();
                    assert_eq!(BigInt::from(total), rs.weyl_dimension(l), "{} {}", alg, l);
                    let pi = weights_of_irrep(rs, l).unwrap();
                    assert_eq!(pi.len(), all.len());
                }
            }
        }
    }

    #[test]
    fn a2_case_formula() {
        let rs = Algebra::A2.data();
        for m1 in 0..=9 {
            for m2 in 0..=m1 {
                let l = w(m1, m2);
                for mu in rs.dominant_weights_below(l) {
                    let [u1, u2] = mu.0;
                    if m1 - m2 > u1 + 2 * u2 + 3 {
                        assert_eq!(weight_mult(rs, l, mu), 1 + m2);
                    }
                }
            }
        }
    }

    #[test]
    fn plethysm_examples() {
        for alg in Algebra::RANK2 {
            let rs = alg.data();
            for a in 2..=5 {
                assert_eq!(plethysm_mult_in(rs, w(2, 1), a, a * w(2, 1)), 1);
            }
        }
        let rs = Algebra::A2.data();
        for m1 in 0..=5 {
            for m2 in 0..=m1 {
                let l = w(m1, m2);
                for (mu, m) in summation_set(rs, l, 2, true).unwrap() {
                    let [u1, u2] = mu.0;
                    if u1 % 2 == 0 && u2 % 2 == 0 && u1 + 2 * u2 >= 2 * (m1 - m2) {
                        assert_eq!(m, 1, "λ={} μ={}", l, mu);
                    }
                    if u1 % 2 == 1 && u2 % 2 == 1 {
                        assert_eq!(m, 0);
                    }
                    if u1 % 2 == 1 && u2 % 2 == 0 && 2 * (m1 - m2) >= u1 - u2 {
                        assert_eq!(m, 0);
                    }
                    if m != 0 {
                        assert!(u1 + 2 * u2 >= 2 * (m1 - m2));
                    }
                }
            }
        }
        let bad = PlethysmQuery { algebra: Algebra::A2, lambda: w(1, 0), a: 1, mu: w(1, 0) };
        assert!(plethysm_mult(&bad).is_err());
    }

    #[test]
    fn a2_mirrored_vanishing() {
        let rs = Algebra::A2.data();
        for m2 in 0..=5 {
            for m1 in 0..=m2 {
                let l = w(m1, m2);
                for (mu, m) in summation_set(rs, l, 2, false).unwrap() {
                    assert_ne!(m, 0);
                    assert!(2 * mu.0[0] + mu.0[1] >= 2 * (m2 - m1));
                }
            }
        }
    }

    #[test]
    fn adams_oracle_small() {
        for alg in [Algebra::A2, Algebra::B2, Algebra::G2] {
            let rs = alg.data();
            for m1 in 0..=2 {
                for m2 in 0..=(2 - m1) {
                    for a in 2..=3 {
                        let l = w(m1, m2);
                        let dec = adams_decomposition(rs, l, a).unwrap();
                        let s = summation_set(rs, l, a, false).unwrap();
                        assert_eq!(dec, s, "{} {} {}", alg, l, a);
                        assert_eq!(dec.get(&(a * l)), Some(&1));
                    }
                }
            }
        }
        let q = PlethysmQuery { algebra: Algebra::A2, lambda: w(40, 40), a: 5, mu: Weight::ZERO };
        assert!(matches!(plethysm_mult_adams_oracle(&q), Err(Error::OracleSizeLimit(_))));
    }

    #[test]
    fn virtual_dimension_is_preserved() {
        for alg in Algebra::ALL {
            let rs = alg.data();
            for m1 in 0..=3 {
                for m2 in 0..=3 {
                    if alg == Algebra::A1 && m2 > 0 {
                        continue;
                    }
                    let l = w(m1, m2);
                    for a in 2..=4 {
                        let s = summation_set(rs, l, a, false).unwrap();
                        let total: BigInt = s.iter().map(|(mu, m)| rs.weyl_dimension(*mu) * BigInt::from(*m)).sum();
                        assert_eq!(total, rs.weyl_dimension(l), "{} {} {}", alg, l, a);
                    }
                }
            }
        }
    }

    #[test]
    fn summation_set_examples() {
        let b2 = Algebra::B2.data();
        let s: BTreeSet<Weight> = summation_set(b2, w(1, 1), 2, true).unwrap().into_keys().collect();
        let want: BTreeSet<Weight> = [w(2, 2), w(0, 4), w(3, 0), w(2, 0), w(0, 2), w(1, 0), w(0, 0)].into_iter().collect();
        assert_eq!(s, want);
        for alg in Algebra::ALL {
            let s = summation_set(alg.data(), Weight::ZERO, 3, true).unwrap();
            assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![(Weight::ZERO, 1)]);
        }
    }

    #[test]
    fn support_inside_hull() {
        for alg in Algebra::RANK2 {
            let rs = alg.data();
            for m1 in 0..=3 {
                for m2 in 0..=3 {
                    for a in 2..=4 {
                        let l = w(m1, m2);
                        let hull = lattice_hull(rs, l, a);
                        let s = summation_set(rs, l, a, true).unwrap();
                        assert!(s.contains_key(&(a * l)));
                        for mu in s.keys() {
                            assert!(hull.contains(*mu) && hull.in_polytope(*mu), "{} {} {} {}", alg, l, a, mu);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn missing_point_examples() {
        let b2 = Algebra::B2.data();
        assert!(missing_points(b2, w(1, 1), 2).unwrap().contains(&w(1, 2)));
        let a2 = Algebra::A2.data();
        for n in 0..=8 {
            assert!(missing_points(a2, w(n, 0), 2).unwrap().is_empty(), "n={}", n);
        }
        for alg in Algebra::RANK2 {
            assert!(missing_points(alg.data(), Weight::ZERO, 2).unwrap().is_empty());
        }
    }

    #[test]
    fn bound_checks() {
        let r = missing_point_bound_check(Algebra::B2.data(), w(1, 1), 2, 1..=5).unwrap();
        assert_eq!(r.rows.len(), 5);
        let r = missing_point_bound_check(Algebra::A2.data(), w(1, 0), 2, 1..=6).unwrap();
        assert!(r.rows.iter().all(|x| x.missing == 0));
        missing_point_bound_check(Algebra::G2.data(), w(1, 0), 2, 1..=4).unwrap();
    }

    #[test]
    fn b2_zero_weight_table() {
        let rs = Algebra::B2.data();
        for m1 in 0..=8 {
            for m2 in 0..=(8 - m1) {
                let l = w(m1, m2);
                let m = |x: Weight| weight_mult(rs, l, x);
                for a in 2..=6 {
                    let extra = match a {
                        2 => -m(w(0, 1)) - m(w(0, 2)) + m(w(1, 1)),
                        3 => -m(w(1, 0)),
                        4 => -m(w(0, 1)),
                        _ => 0,
                    };
                    assert_eq!(plethysm_mult_in(rs, l, a, Weight::ZERO), m(Weight::ZERO) + extra);
                }
            }
        }
    }

    #[test]
    fn g2_zero_weight_for_a2() {
        let rs = Algebra::G2.data();
        for m1 in 0..=5 {
            for m2 in 0..=(5 - m1) {
                assert_eq!(plethysm_mult_in(rs, w(m1, m2), 2, Weight::ZERO), 1);
            }
        }
    }

    #[test]
    fn quasipoly_fits() {
        let a2 = Algebra::A2.data();
        let f = plethysm_quasipoly_fit(a2, w(1, 0), 2, Weight::ZERO, w(0, 1), 16).unwrap();
        assert_eq!(f.period(), 2);
        assert_eq!(f.degree(), 0);
        assert!(f.eval(40).is_one());
        assert!((-f.eval(41)).is_one());
        let f = plethysm_quasipoly_fit(a2, w(1, 1), 4, w(2, 2), Weight::ZERO, 24).unwrap();
        assert_eq!(f.degree(), 1);
        assert!(!f.eval(10).is_zero());
        assert_eq!(f.eval(30).to_integer().to_i64(), Some(plethysm_mult_in(a2, w(30, 30), 4, w(2, 2))));
    }

    proptest! {
        #[test]
        fn weight_mult_is_weyl_invariant(m1 in 0i64..5, m2 in 0i64..5, u1 in -6i64..7, u2 in -6i64..7, k in 0usize..3) {
            let rs = Algebra::RANK2[k].data();
            let l = w(m1, m2);
            let mu = w(u1, u2);
            let m = weight_mult(rs, l, mu);
            for s in &rs.weyl {
                prop_assert_eq!(weight_mult(rs, l, s.apply(mu)), m);
            }
            let in_pi = weights_of_irrep(rs, l).unwrap().contains(&mu);
            prop_assert_eq!(m != 0, in_pi);
        }
    }
}
