//! Colored Jones polynomials of torus knots by the Rosso–Jones formula.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{Algebra, RootSystemData, Weight};
use crate::mult::summation_set;
use crate::qseries::{exact_div, TruncatedSeries, Q64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TorusKnot {
    pub a: i64,
    pub b: i64,
}

impl TorusKnot {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if !(0 < a && a < b) {
            return Err(Error::Invalid(format!("torus knot needs 0 < a < b, got ({},{})", a, b)));
        }
        if a.gcd(&b) != 1 {
            return Err(Error::NotCoprime(a, b));
        }
        Ok(TorusKnot { a, b })
    }
}

impl std::fmt::Display for TorusKnot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "T({},{})", self.a, self.b)
    }
}

/// The minimum and maximum degree forms `f*` and `f` of a single summand.
#[derive(Clone, Copy, Debug)]
pub struct QuadraticForms<'a> {
    pub rs: &'a RootSystemData,
    pub knot: TorusKnot,
    pub lambda: Weight,
}

impl QuadraticForms<'_> {
    fn ratio(&self) -> Q64 {
        Q64::new(self.knot.b, self.knot.a)
    }

    fn constant(&self, sign: i64) -> Q64 {
        let (a, b) = (self.knot.a, self.knot.b);
        let l = self.lambda;
        -Q64::new(a * b, 2) * self.rs.inner(l, l) - Q64::from_integer(a * b + sign) * self.rs.inner(l, self.rs.rho)
    }

    /// Summand exponent `(b/2a)(μ,μ) + (b/a - 1)(μ,ρ)` without the global prefactor.
    pub fn summand_exponent(&self, mu: Weight) -> Q64 {
        let r = self.ratio();
        r / 2 * self.rs.inner(mu, mu) + (r - 1) * self.rs.inner(mu, self.rs.rho)
    }

    pub fn f_star(&self, mu: Weight) -> Q64 {
        self.summand_exponent(mu) + self.constant(-1)
    }

    pub fn f(&self, mu: Weight) -> Q64 {
        let r = self.ratio();
        r / 2 * self.rs.inner(mu, mu) + (r + 1) * self.rs.inner(mu, self.rs.rho) + self.constant(1)
    }
}

pub fn quadratic_forms(rs: &RootSystemData, knot: TorusKnot, lambda: Weight) -> QuadraticForms<'_> {
    QuadraticForms { rs, knot, lambda }
}

/// The closed-form minimizer `μ_{λ,a}` of `f*` over the summation set.
pub fn minimizer_closed_form(rs: &RootSystemData, lambda: Weight, a: i64) -> Result<Weight> {
    if a < 2 {
        return Err(Error::Invalid(format!("Adams degree a={} must be at least 2", a)));
    }
    if !lambda.is_dominant() {
        return Err(Error::NotDominant(lambda.to_string()));
    }
    let [m1, m2] = lambda.0;
    let w = Weight::new;
    let mu = match rs.algebra {
        Algebra::A2 => match a {
            2 if m1 >= m2 => w(0, m1 - m2),
            2 => w(m2 - m1, 0),
            3 => Weight::ZERO,
            _ => match (m1 - m2).rem_euclid(3) {
                0 => Weight::ZERO,
                1 => w(a - 3, 0),
                _ => w(0, a - 3),
            },
        },
        Algebra::B2 => match a {
            2 if m1 == 0 && m2 % 2 == 1 => w(1, 0),
            2 => Weight::ZERO,
            3 if m2 % 2 == 1 => w(1, 1),
            3 if m1 % 2 == 1 => w(0, 2),
            3 => Weight::ZERO,
            4 => Weight::ZERO,
            _ if m2 % 2 == 1 => w(0, a - 4),
            _ => Weight::ZERO,
        },
        Algebra::G2 => Weight::ZERO,
        Algebra::A1 => return Err(Error::UnsupportedAlgebra("A1".into())),
    };
    Ok(mu)
}

/// Argmin of `f*` over the support of `m^μ_{λ,a}` in `S_{λ,a}`, which must be unique.
pub fn minimizer_bruteforce_for(rs: &RootSystemData, knot: TorusKnot, lambda: Weight) -> Result<Weight> {
    let s = summation_set(rs, lambda, knot.a, false)?;
    let qf = quadratic_forms(rs, knot, lambda);
    let mut best: Option<(Q64, Weight)> = None;
    let mut tie = false;
    for mu in s.keys() {
        let v = qf.f_star(*mu);
        match &best {
            Some((b, _)) if v > *b => {}
            Some((b, _)) if v == *b => tie = true,
            _ => {
                best = Some((v, *mu));
                tie = false;
            }
        }
    }
    let (_, mu) = best.ok_or_else(|| Error::Minimizer("empty support".into()))?;
    if tie {
        return Err(Error::Minimizer(format!("non-unique argmin for {} λ={} {}", rs.algebra, lambda, knot)));
    }
    Ok(mu)
}

/// Brute-force minimizer using the knots `T(a,a+1)` and `T(a,2a+1)`; both must agree.
pub fn minimizer_bruteforce(rs: &RootSystemData, lambda: Weight, a: i64) -> Result<Weight> {
    if rs.rank() != 2 {
        return Err(Error::UnsupportedAlgebra(rs.algebra.to_string()));
    }
    let m1 = minimizer_bruteforce_for(rs, TorusKnot::new(a, a + 1)?, lambda)?;
    let m2 = minimizer_bruteforce_for(rs, TorusKnot::new(a, 2 * a + 1)?, lambda)?;
    if m1 != m2 {
        return Err(Error::Minimizer(format!("argmin depends on b: {} vs {}", m1, m2)));
    }
    Ok(m1)
}

/// Argmax of `f` over all of `S_{λ,a}`, which must be unique; returns it with its multiplicity.
pub fn maximizer_bruteforce(rs: &RootSystemData, knot: TorusKnot, lambda: Weight) -> Result<(Weight, i64)> {
    let s = summation_set(rs, lambda, knot.a, true)?;
    let qf = quadratic_forms(rs, knot, lambda);
    let mut vals: Vec<(Q64, Weight, i64)> = s.iter().map(|(mu, m)| (qf.f(*mu), *mu, *m)).collect();
    vals.sort_by_key(|v| std::cmp::Reverse(v.0));
    if vals.len() > 1 && vals[0].0 == vals[1].0 {
        return Err(Error::Minimizer(format!("non-unique argmax for {} λ={}", rs.algebra, lambda)));
    }
    Ok((vals[0].1, vals[0].2))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredJonesResult {
    pub knot: TorusKnot,
    pub algebra: Algebra,
    pub lambda: Weight,
    pub polynomial: TruncatedSeries,
    pub delta_star: Q64,
    pub delta: Q64,
}

impl ColoredJonesResult {
    /// `Ĵ = q^{-δ*} J`.
    pub fn shifted(&self) -> TruncatedSeries {
        match self.polynomial.min_exp() {
            Some(e) => self.polynomial.shift(-e).reduced(),
            None => TruncatedSeries::zero(),
        }
    }

    pub fn denom(&self) -> i64 {
        self.polynomial.denom()
    }
}

impl Serialize for ColoredJonesResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ColoredJonesResult", 6)?;
        st.serialize_field("knot", &[self.knot.a, self.knot.b])?;
        st.serialize_field("algebra", &self.algebra)?;
        st.serialize_field("lambda", &self.lambda)?;
        st.serialize_field("delta_star", &self.delta_star.to_string())?;
        st.serialize_field("delta", &self.delta.to_string())?;
        st.serialize_field("polynomial", &self.polynomial)?;
        st.end()
    }
}

fn lcm_denoms<'a>(xs: impl IntoIterator<Item = &'a Q64>) -> i64 {
    xs.into_iter().fold(1i64, |d, x| d.lcm(x.denom()))
}

fn to_num(x: Q64, d: i64) -> i64 {
    let y = x * d;
    debug_assert!(y.is_integer());
    y.to_integer()
}

/// `Σ m·q^{E(μ)} ∏_α (1 - q^{(μ+ρ,α)})` over the given summands, returned over a
/// common denominator together with the denominators used.
fn summand_polynomial(rs: &RootSystemData, summands: &[(Weight, i64, Q64)], extra: &[Q64]) -> TruncatedSeries {
    let rows: Vec<(Q64, Vec<Q64>, i64)> = summands
        .iter()
        .map(|(mu, m, e)| {
            let prods = rs.positive_roots.iter().map(|a| rs.inner(*mu + rs.rho, *a)).collect();
            (*e, prods, *m)
        })
        .collect();
    let d = rows
        .iter()
        .fold(lcm_denoms(extra), |d, (e, p, _)| d.lcm(&lcm_denoms(p.iter().chain(std::iter::once(e)))));
    let chunks: Vec<Vec<(i64, i64)>> = rows
        .par_iter()
        .map(|(e, prods, m)| {
            let base = to_num(*e, d);
            let ps: Vec<i64> = prods.iter().map(|p| to_num(*p, d)).collect();
            let mut out = Vec::with_capacity(1 << ps.len());
            for mask in 0u32..(1 << ps.len()) {
                let mut x = base;
                let mut sign = *m;
                for (i, p) in ps.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        x += p;
                        sign = -sign;
                    }
                }
                out.push((x, sign));
            }
            out
        })
        .collect();
    let mut acc: BTreeMap<i64, BigInt> = BTreeMap::new();
    for chunk in chunks {
        for (x, c) in chunk {
            *acc.entry(x).or_insert_with(BigInt::zero) += c;
        }
    }
    TruncatedSeries::from_terms(d, acc, None)
}

fn divide_denominators(rs: &RootSystemData, num: &TruncatedSeries, lambda: Weight) -> Result<TruncatedSeries> {
    let mut f = num.clone();
    for a in &rs.positive_roots {
        let e = rs.inner(lambda + rs.rho, *a);
        f = exact_div(&f, e).map_err(|_| Error::JonesNotDivisible)?;
    }
    Ok(f)
}

fn nonzero_summands(rs: &RootSystemData, knot: TorusKnot, lambda: Weight) -> Result<Vec<(Weight, i64)>> {
    if !lambda.is_dominant() {
        return Err(Error::NotDominant(lambda.to_string()));
    }
    rs.check_weight(lambda)?;
    Ok(summation_set(rs, lambda, knot.a, true)?.into_iter().filter(|(_, m)| *m != 0).collect())
}

/// `J_{T(a,b),λ}(q)` computed exactly.
pub fn colored_jones(rs: &RootSystemData, knot: TorusKnot, lambda: Weight) -> Result<ColoredJonesResult> {
    let s = nonzero_summands(rs, knot, lambda)?;
    let qf = quadratic_forms(rs, knot, lambda);
    let rows: Vec<(Weight, i64, Q64)> = s.iter().map(|(mu, m)| (*mu, *m, qf.summand_exponent(*mu))).collect();
    let pref = qf.constant(-1);
    let dens: Vec<Q64> = rs.positive_roots.iter().map(|a| rs.inner(lambda + rs.rho, *a)).collect();
    let mut extra = dens.clone();
    extra.push(pref);
    let num = summand_polynomial(rs, &rows, &extra);
    let f = divide_denominators(rs, &num, lambda)?;
    let d = f.denom().lcm(pref.denom());
    let j = f.rescale(d).shift(to_num(pref, d)).reduced();
    let delta_star = j.min_degree().ok_or(Error::JonesNotDivisible)?;
    let delta = j.max_degree().unwrap();
    Ok(ColoredJonesResult { knot, algebra: rs.algebra, lambda, polynomial: j, delta_star, delta })
}

/// `J̌`: the shifted numerator summed over `Ŝ = S - μ_{λ,a}`, with `μ_{λ,a}`
/// taken from the closed-form table.
pub fn checked_sum(rs: &RootSystemData, knot: TorusKnot, lambda: Weight) -> Result<TruncatedSeries> {
    if rs.rank() != 2 {
        return Err(Error::UnsupportedAlgebra(rs.algebra.to_string()));
    }
    let mu0 = minimizer_closed_form(rs, lambda, knot.a)?;
    checked_sum_with(rs, knot, lambda, mu0)
}

/// Same as [`checked_sum`] with an explicit shift point.
pub fn checked_sum_with(rs: &RootSystemData, knot: TorusKnot, lambda: Weight, mu0: Weight) -> Result<TruncatedSeries> {
    let s = nonzero_summands(rs, knot, lambda)?;
    let r = Q64::new(knot.b, knot.a);
    let rows: Vec<(Weight, i64, Q64)> = s
        .iter()
        .map(|(mu, m)| {
            let h = *mu - mu0;
            let e = r / 2 * rs.inner(h, h) + (r - 1) * rs.inner(h, rs.rho) + r * rs.inner(h, mu0);
            (*mu, *m, e)
        })
        .collect();
    let f = summand_polynomial(rs, &rows, &[]).reduced();
    match f.min_exp() {
        Some(0) => Ok(f),
        None if lambda.is_zero() => Ok(f),
        other => Err(Error::Minimizer(format!("shifted sum has min degree {:?}", other))),
    }
}

/// `Ĵ` obtained from [`checked_sum`] by dividing out `∏(1 - q^{(λ+ρ,α)})`,
/// normalized so that the constant term is `+1`.
pub fn shifted_jones(rs: &RootSystemData, knot: TorusKnot, lambda: Weight) -> Result<TruncatedSeries> {
    let c = checked_sum(rs, knot, lambda)?;
    let j = divide_denominators(rs, &c, lambda)?.reduced();
    Ok(normalize_sign(j))
}

/// Multiplies by the sign of the lowest coefficient.
pub fn normalize_sign(f: TruncatedSeries) -> TruncatedSeries {
    match f.min_exp() {
        Some(e) if f.coeff(e).is_negative() => f.neg(),
        _ => f,
    }
}

/// Top coefficient of `J` (at `q^δ`).
pub fn top_coefficient(j: &ColoredJonesResult) -> BigInt {
    j.polynomial.coeff(j.polynomial.max_exp().unwrap_or(0))
}

pub fn is_unit(c: &BigInt) -> bool {
    c.abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::exact_div;

    fn w(a: i64, b: i64) -> Weight {
        Weight([a, b])
    }

    #[test]
    fn knot_validation() {
        assert!(TorusKnot::new(2, 3).is_ok());
        assert_eq!(TorusKnot::new(2, 4), Err(Error::NotCoprime(2, 4)));
        assert!(TorusKnot::new(3, 2).is_err());
        assert!(TorusKnot::new(0, 2).is_err());
    }

    #[test]
    fn trivial_color_gives_one() {
        for alg in Algebra::ALL {
            let j = colored_jones(alg.data(), TorusKnot::new(2, 3).unwrap(), Weight::ZERO).unwrap();
            assert_eq!(j.polynomial, TruncatedSeries::one());
        }
        assert_eq!(shifted_jones(Algebra::A2.data(), TorusKnot::new(2, 3).unwrap(), Weight::ZERO).unwrap(), TruncatedSeries::one());
        let qf = quadratic_forms(Algebra::A2.data(), TorusKnot::new(2, 3).unwrap(), Weight::ZERO);
        assert_eq!(qf.f_star(Weight::ZERO), Q64::from_integer(0));
    }

    #[test]
    fn minimizer_examples() {
        let a2 = Algebra::A2.data();
        assert_eq!(minimizer_closed_form(a2, w(5, 2), 2).unwrap(), w(0, 3));
        assert_eq!(minimizer_closed_form(a2, w(1, 0), 4).unwrap(), w(1, 0));
        assert_eq!(minimizer_closed_form(Algebra::B2.data(), w(1, 1), 3).unwrap(), w(1, 1));
        assert_eq!(minimizer_closed_form(Algebra::G2.data(), w(3, 4), 5).unwrap(), Weight::ZERO);
        assert!(matches!(minimizer_closed_form(Algebra::A1.data(), w(1, 0), 2), Err(Error::UnsupportedAlgebra(_))));
        for alg in Algebra::RANK2 {
            assert_eq!(minimizer_bruteforce(alg.data(), Weight::ZERO, 3).unwrap(), Weight::ZERO);
        }
        assert_eq!(minimizer_bruteforce(a2, w(1, 0), 4).unwrap(), w(1, 0));
    }

    // The closed-form table disagrees with the brute-force argmin exactly on
    // B2 `(0, odd)` at `a = 2` and G2 `(1, m2)` at `a = 4, 5`.
    fn table_exception(alg: Algebra, l: Weight, a: i64) -> bool {
        match alg {
            Algebra::B2 => a == 2 && l.0[0] == 0 && l.0[1] % 2 == 1,
            Algebra::G2 => (a == 4 || a == 5) && l.0[0] == 1,
            _ => false,
        }
    }

    #[test]
    fn minimizer_tables_match_bruteforce() {
        for alg in Algebra::RANK2 {
            let rs = alg.data();
            for m1 in 0..=4 {
                for m2 in 0..=(4 - m1) {
                    for a in 2..=5 {
                        let l = w(m1, m2);
                        let same = minimizer_bruteforce(rs, l, a).unwrap() == minimizer_closed_form(rs, l, a).unwrap();
                        assert_eq!(same, !table_exception(alg, l, a), "{} {} a={}", alg, l, a);
                    }
                }
            }
        }
    }

    #[test]
    fn table_exceptions_are_detected() {
        let b2 = Algebra::B2.data();
        let k = TorusKnot::new(2, 5).unwrap();
        assert!(matches!(checked_sum(b2, k, w(0, 1)), Err(Error::Minimizer(_))));
        let mu0 = minimizer_bruteforce_for(b2, k, w(0, 1)).unwrap();
        let c = checked_sum_with(b2, k, w(0, 1), mu0).unwrap();
        assert!(!c.coeff(0).is_zero());
        let g2 = Algebra::G2.data();
        assert!(matches!(checked_sum(g2, TorusKnot::new(4, 5).unwrap(), w(1, 0)), Err(Error::Minimizer(_))));
    }

    #[test]
    fn trefoil_degrees() {
        let rs = Algebra::A2.data();
        let k = TorusKnot::new(2, 3).unwrap();
        for n in 0..=8 {
            let l = w(n, 0);
            let j = colored_jones(rs, k, l).unwrap();
            let qf = quadratic_forms(rs, k, l);
            assert_eq!(j.delta_star, qf.f_star(w(0, n)));
            assert_eq!(j.delta, qf.f(2 * l));
            assert!(is_unit(&top_coefficient(&j)));
        }
        let l = w(2, 0);
        let j = colored_jones(rs, k, l).unwrap();
        let qf = quadratic_forms(rs, k, l);
        assert_eq!(j.delta_star, qf.f_star(minimizer_closed_form(rs, l, 2).unwrap()));
    }

    #[test]
    fn checked_sum_consistent_with_jones() {
        let rs = Algebra::A2.data();
        let k = TorusKnot::new(2, 3).unwrap();
        for n in 0..=10 {
            let l = w(n, 0);
            let j = colored_jones(rs, k, l).unwrap();
            assert_eq!(shifted_jones(rs, k, l).unwrap(), normalize_sign(j.shifted()), "n={}", n);
        }
        let c = checked_sum(rs, k, w(3, 0)).unwrap();
        let mut f = c.clone();
        for a in &rs.positive_roots {
            f = exact_div(&f, rs.inner(w(3, 0) + rs.rho, *a)).unwrap();
        }
        assert_eq!(f.min_exp(), Some(0));
    }

    #[test]
    fn maximizer_is_unique_top() {
        for alg in Algebra::ALL {
            let rs = alg.data();
            for m1 in 0..=3 {
                for m2 in 0..=3 {
                    if alg == Algebra::A1 && m2 > 0 {
                        continue;
                    }
                    for (a, b) in [(2, 3), (3, 4), (4, 5)] {
                        let l = w(m1, m2);
                        let (mu, m) = maximizer_bruteforce(rs, TorusKnot::new(a, b).unwrap(), l).unwrap();
                        assert_eq!(mu, a * l);
                        assert_eq!(m, 1);
                    }
                }
            }
        }
    }

    #[test]
    fn a1_smoke() {
        let rs = Algebra::A1.data();
        let k = TorusKnot::new(2, 3).unwrap();
        for n in 0..=6 {
            let j = colored_jones(rs, k, w(n, 0)).unwrap();
            let qf = quadratic_forms(rs, k, w(n, 0));
            assert_eq!(j.delta, qf.f(w(2 * n, 0)));
            assert!(is_unit(&top_coefficient(&j)));
        }
    }
}
