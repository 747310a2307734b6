//! Truncated Laurent series in `q^{1/D}` with big-integer coefficients.
//!
//! A [`TruncatedSeries`] stores exponent numerators over one denominator `D`
//! together with an optional truncation order. `order == None` means the
//! series is exact (a Laurent polynomial, or zero).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q64 = Ratio<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    denom: i64,
    terms: BTreeMap<i64, BigInt>,
    order: Option<i64>,
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl TruncatedSeries {
    /// Builds a series from `(numerator, coefficient)` pairs, merging repeats
    /// and dropping zeros and anything at or above `order`.
    pub fn from_terms<I>(denom: i64, terms: I, order: Option<i64>) -> Self
    where
        I: IntoIterator<Item = (i64, BigInt)>,
    {
        assert!(denom > 0, "denominator must be positive");
        let mut map: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (e, c) in terms {
            if let Some(o) = order {
                if e >= o {
                    continue;
                }
            }
            *map.entry(e).or_insert_with(BigInt::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        TruncatedSeries { denom, terms: map, order }
    }

    pub fn zero() -> Self {
        TruncatedSeries { denom: 1, terms: BTreeMap::new(), order: None }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0, BigInt::one())
    }

    pub fn monomial(denom: i64, e: i64, c: BigInt) -> Self {
        Self::from_terms(denom, [(e, c)], None)
    }

    /// Integer-exponent polynomial `Σ coeffs[i] q^{start+i}`.
    pub fn from_coeffs(start: i64, coeffs: &[i64], order: Option<i64>) -> Self {
        Self::from_terms(
            1,
            coeffs.iter().enumerate().map(|(i, &c)| (start + i as i64, BigInt::from(c))),
            order,
        )
    }

    /// `1 - q^{e/denom}`.
    pub fn one_minus(denom: i64, e: i64) -> Self {
        Self::from_terms(denom, [(0, BigInt::one()), (e, -BigInt::one())], None)
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn order(&self) -> Option<i64> {
        self.order
    }

    /// Truncation order as a rational exponent of `q`.
    pub fn order_q(&self) -> Option<Q64> {
        self.order.map(|o| Q64::new(o, self.denom))
    }

    pub fn terms(&self) -> &BTreeMap<i64, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.order.is_none()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        self.terms.get(&e).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Coefficient of `q^r` for a rational exponent `r`.
    pub fn coeff_q(&self, r: Q64) -> BigInt {
        let scaled = r * self.denom;
        if !scaled.is_integer() {
            return BigInt::zero();
        }
        self.coeff(scaled.to_integer())
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// The degree `δ*`: smallest exponent with a nonzero coefficient.
    pub fn min_degree(&self) -> Option<Q64> {
        self.min_exp().map(|e| Q64::new(e, self.denom))
    }

    pub fn max_degree(&self) -> Option<Q64> {
        self.max_exp().map(|e| Q64::new(e, self.denom))
    }

    /// Re-express over the denominator `new_denom`, which must be a multiple of the current one.
    pub fn rescale(&self, new_denom: i64) -> Self {
        assert!(new_denom > 0 && new_denom % self.denom == 0, "incompatible denominator");
        let k = new_denom / self.denom;
        TruncatedSeries {
            denom: new_denom,
            terms: self.terms.iter().map(|(e, c)| (e * k, c.clone())).collect(),
            order: self.order.map(|o| o * k),
        }
    }

    /// Smallest denominator that represents every exponent and the order exactly.
    pub fn reduced(&self) -> Self {
        let mut g = self.denom;
        for e in self.terms.keys() {
            g = g.gcd(e);
        }
        if let Some(o) = self.order {
            g = g.gcd(&o);
        }
        if g <= 1 {
            return self.clone();
        }
        TruncatedSeries {
            denom: self.denom / g,
            terms: self.terms.iter().map(|(e, c)| (e / g, c.clone())).collect(),
            order: self.order.map(|o| o / g),
        }
    }

    pub fn truncate(&self, order: i64) -> Self {
        let o = min_opt(self.order, Some(order));
        TruncatedSeries {
            denom: self.denom,
            terms: self.terms.range(..o.unwrap()).map(|(e, c)| (*e, c.clone())).collect(),
            order: o,
        }
    }

    /// Truncate at `q^order` for an integer `order`.
    pub fn truncate_q(&self, order: i64) -> Self {
        self.truncate(order * self.denom)
    }

    /// Multiply by `q^{e/denom}`.
    pub fn shift(&self, e: i64) -> Self {
        TruncatedSeries {
            denom: self.denom,
            terms: self.terms.iter().map(|(k, c)| (k + e, c.clone())).collect(),
            order: self.order.map(|o| o + e),
        }
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            denom: self.denom,
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
            order: self.order,
        }
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        if s.is_zero() {
            return TruncatedSeries { denom: self.denom, terms: BTreeMap::new(), order: self.order };
        }
        TruncatedSeries {
            denom: self.denom,
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
            order: self.order,
        }
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        let d = self.denom.lcm(&other.denom);
        (self.rescale(d), other.rescale(d))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (f, g) = self.common(other);
        let order = min_opt(f.order, g.order);
        Self::from_terms(f.denom, f.terms.into_iter().chain(g.terms), order)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Product, exact below `min(δ*(f)+order(g), δ*(g)+order(f))`.
    pub fn mul(&self, other: &Self) -> Self {
        let (f, g) = self.common(other);
        if f.is_zero() || g.is_zero() {
            let order = match (f.is_zero(), g.is_zero()) {
                (true, true) => min_opt(f.order, g.order),
                (true, false) => f.order.map(|o| o + g.min_exp().unwrap()),
                (false, true) => g.order.map(|o| o + f.min_exp().unwrap()),
                _ => unreachable!(),
            };
            return TruncatedSeries { denom: f.denom, terms: BTreeMap::new(), order };
        }
        let fmin = f.min_exp().unwrap();
        let gmin = g.min_exp().unwrap();
        let order = min_opt(f.order.map(|o| o + gmin), g.order.map(|o| o + fmin));
        let mut acc: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (ef, cf) in &f.terms {
            for (eg, cg) in &g.terms {
                let e = ef + eg;
                if let Some(o) = order {
                    if e >= o {
                        break;
                    }
                }
                *acc.entry(e).or_insert_with(BigInt::zero) += cf * cg;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        TruncatedSeries { denom: f.denom, terms: acc, order }
    }

    /// True when both series agree on every exponent below `q^order` and
    /// both are known there.
    pub fn agrees_to(&self, other: &Self, order: Q64) -> bool {
        let (f, g) = self.common(other);
        let o = order * f.denom;
        let o = if o.is_integer() { o.to_integer() } else { o.ceil().to_integer() };
        if f.order.is_some_and(|x| x < o) || g.order.is_some_and(|x| x < o) {
            return false;
        }
        f.terms.range(..o).eq(g.terms.range(..o))
    }

    /// Evaluates the coefficient list as `(exponent as rational, coefficient)`.
    pub fn iter_q(&self) -> impl Iterator<Item = (Q64, &BigInt)> + '_ {
        self.terms.iter().map(move |(e, c)| (Q64::new(*e, self.denom), c))
    }

    /// Dense integer coefficients for `q^0 .. q^{order-1}`, requiring denominator 1.
    pub fn dense_coeffs(&self, order: i64) -> Vec<BigInt> {
        assert_eq!(self.denom, 1, "dense view needs integral exponents");
        (0..order).map(|e| self.coeff(e)).collect()
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let ex = Q64::new(*e, self.denom);
            if ex.is_zero() {
                write!(f, "{}", a)?;
                continue;
            }
            if !a.is_one() {
                write!(f, "{}", a)?;
            }
            if ex.is_one() {
                write!(f, "q")?;
            } else {
                write!(f, "q^{}", ex)?;
            }
        }
        match self.order {
            Some(o) => write!(f, " + O(q^{})", Q64::new(o, self.denom)),
            None => Ok(()),
        }
    }
}

pub fn series_add(f: &TruncatedSeries, g: &TruncatedSeries) -> TruncatedSeries {
    f.add(g)
}

pub fn series_mul(f: &TruncatedSeries, g: &TruncatedSeries) -> TruncatedSeries {
    f.mul(g)
}

/// `Σ_{j≥0} q^{je}` truncated at `q^order`.
pub fn geometric_inverse(e: Q64, order: i64) -> Result<TruncatedSeries> {
    if e <= Q64::zero() {
        return Err(Error::NonExpandable(e.to_string()));
    }
    let denom = *e.denom();
    let step = *e.numer();
    let o = order * denom;
    let terms = (0..).map(|j| j * step).take_while(|&x| x < o).map(|x| (x, BigInt::one()));
    Ok(TruncatedSeries::from_terms(denom, terms.collect::<Vec<_>>(), Some(o)))
}

/// Exact quotient of a polynomial by `1 - q^e`.
pub fn exact_div(f: &TruncatedSeries, e: Q64) -> Result<TruncatedSeries> {
    if e <= Q64::zero() {
        return Err(Error::NonExpandable(e.to_string()));
    }
    if !f.is_exact() {
        return Err(Error::Invalid("exact division needs a polynomial".into()));
    }
    let d = f.denom().lcm(e.denom());
    let f = f.rescale(d);
    let step = (e * d).to_integer();
    let mut classes: BTreeMap<i64, Vec<(i64, &BigInt)>> = BTreeMap::new();
    for (x, c) in &f.terms {
        classes.entry(x.rem_euclid(step)).or_default().push((*x, c));
    }
    let mut out: BTreeMap<i64, BigInt> = BTreeMap::new();
    for chain in classes.values() {
        let mut running = BigInt::zero();
        for (i, (x, c)) in chain.iter().enumerate() {
            running += *c;
            if i + 1 == chain.len() {
                if !running.is_zero() {
                    return Err(Error::DivisionRemainder);
                }
                break;
            }
            if running.is_zero() {
                continue;
            }
            let next = chain[i + 1].0;
            let mut y = *x;
            while y < next {
                out.insert(y, running.clone());
                y += step;
            }
        }
    }
    Ok(TruncatedSeries { denom: d, terms: out, order: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThetaParams {
    pub b: Q64,
    pub c: Q64,
}

impl ThetaParams {
    pub fn new(b: Q64, c: Q64) -> Result<Self> {
        if b <= Q64::zero() {
            return Err(Error::Invalid(format!("theta needs b > 0, got {}", b)));
        }
        let p = ThetaParams { b, c };
        for s in -2..=2 {
            p.exponent(s)?;
        }
        Ok(p)
    }

    pub fn exponent(&self, s: i64) -> Result<i64> {
        let s = Q64::from_integer(s);
        let e = self.b / 2 * s * s + self.c * s;
        if !e.is_integer() {
            return Err(Error::NonIntegralExponent(e.to_string()));
        }
        Ok(e.to_integer())
    }
}

/// `θ_{b,c}(q) = Σ_{s∈ℤ} (-1)^s q^{(b/2)s² + cs}` below `q^order`.
pub fn theta(p: ThetaParams, order: i64) -> Result<TruncatedSeries> {
    let vertex = (-p.c / p.b).to_f64().unwrap_or(0.0);
    let mut terms = Vec::new();
    for dir in [1i64, -1] {
        let mut s = if dir == 1 { 0 } else { -1 };
        loop {
            let e = p.exponent(s)?;
            let past = if dir == 1 { (s as f64) > vertex } else { (s as f64) < vertex };
            if e >= order && past {
                break;
            }
            if e < order {
                let sign = if s.rem_euclid(2) == 0 { 1 } else { -1 };
                terms.push((e, BigInt::from(sign)));
            }
            s += dir;
        }
    }
    Ok(TruncatedSeries::from_terms(1, terms, Some(order)))
}

/// `(q^a; q^m)_∞ = ∏_{k≥0} (1 - q^{a+km})` below `q^order`.
pub fn pochhammer(a: Q64, m: Q64, order: i64) -> Result<TruncatedSeries> {
    if m <= Q64::zero() {
        return Err(Error::Divergent(format!("a={}, m={}", a, m)));
    }
    let d = a.denom().lcm(m.denom());
    let an = (a * d).to_integer();
    let mn = (m * d).to_integer();
    let o = order * d;
    let mut f = TruncatedSeries::one().rescale(d);
    let mut e = an;
    while e < o {
        f = f.mul(&TruncatedSeries::one_minus(d, e)).truncate(o);
        e += mn;
    }
    Ok(f.truncate(o))
}

/// `(q)_∞` below `q^order`.
pub fn q_pochhammer(order: i64) -> TruncatedSeries {
    pochhammer(Q64::one(), Q64::one(), order).expect("m = 1 is valid")
}

/// Coefficient growth is polynomial here, so a dense vector product is the
/// cheapest way to expand long products of `1 - q^e` factors.
pub fn product_one_minus(exps: &[i64], order: i64) -> TruncatedSeries {
    let n = order.max(0) as usize;
    let mut v: Vec<BigInt> = vec![BigInt::zero(); n];
    if n > 0 {
        v[0] = BigInt::one();
    }
    for &e in exps {
        assert!(e > 0, "product_one_minus needs positive exponents");
        let e = e as usize;
        for i in (e..n).rev() {
            let t = v[i - e].clone();
            v[i] -= t;
        }
    }
    TruncatedSeries::from_terms(1, v.into_iter().enumerate().map(|(i, c)| (i as i64, c)), Some(order))
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    denom: i64,
    order: Option<i64>,
    terms: Vec<(i64, String)>,
}

impl Serialize for TruncatedSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TruncatedSeries", 3)?;
        st.serialize_field("denom", &self.denom)?;
        st.serialize_field("order", &self.order)?;
        let terms: Vec<(i64, String)> = self.terms.iter().map(|(e, c)| (*e, c.to_string())).collect();
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SeriesJson::deserialize(d)?;
        if raw.denom <= 0 {
            return Err(de::Error::custom("denom must be positive"));
        }
        let mut terms = Vec::with_capacity(raw.terms.len());
        for (e, c) in raw.terms {
            let c: BigInt = c.parse().map_err(de::Error::custom)?;
            terms.push((e, c));
        }
        Ok(TruncatedSeries::from_terms(raw.denom, terms, raw.order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Q64 {
        Q64::new(n, d)
    }

    fn poly(c: &[i64]) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(0, c, None)
    }

    #[test]
    fn add_cancels_and_merges() {
        assert_eq!(poly(&[1, -1]).add(&poly(&[0, 1])), TruncatedSeries::one());
        let f = poly(&[1, 0, 0, 1]);
        assert_eq!(f.add(&TruncatedSeries::zero()), f);
        assert_eq!(f.add(&poly(&[0, 1, 0, 1])), poly(&[1, 1, 0, 2]));
    }

    #[test]
    fn mul_examples() {
        let g = geometric_inverse(q(1, 1), 10).unwrap();
        let p = poly(&[1, -1]).mul(&g);
        assert_eq!(p.order(), Some(10));
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.coeff(0), BigInt::one());
        let f = poly(&[3, 0, 2]);
        assert_eq!(f.mul(&TruncatedSeries::one()), f);
        assert_eq!(poly(&[1, -1]).mul(&poly(&[1, 0, -1])), poly(&[1, -1, -1, 1]));
    }

    #[test]
    fn geometric_examples() {
        assert_eq!(geometric_inverse(q(1, 1), 4).unwrap().terms().len(), 4);
        let g2 = geometric_inverse(q(2, 1), 5).unwrap();
        assert_eq!(g2.terms().keys().copied().collect::<Vec<_>>(), vec![0, 2, 4]);
        let g3 = geometric_inverse(q(3, 1), 20).unwrap();
        let one = TruncatedSeries::one_minus(1, 3).mul(&g3);
        assert!(one.agrees_to(&TruncatedSeries::one(), q(20, 1)));
        assert!(matches!(geometric_inverse(q(0, 1), 3), Err(Error::NonExpandable(_))));
        assert!(matches!(geometric_inverse(q(-1, 2), 3), Err(Error::NonExpandable(_))));
        let half = geometric_inverse(q(1, 2), 2).unwrap();
        assert_eq!(half.denom(), 2);
        assert_eq!(half.len(), 4);
    }

    #[test]
    fn exact_div_examples() {
        assert_eq!(exact_div(&poly(&[1, 0, -1]), q(1, 1)).unwrap(), poly(&[1, 1]));
        assert!(exact_div(&TruncatedSeries::zero(), q(1, 1)).unwrap().is_zero());
        assert_eq!(exact_div(&poly(&[1, 1]), q(1, 1)), Err(Error::DivisionRemainder));
        let f = poly(&[0, 0, 5, 0, 0, 0, 0, -5]);
        assert_eq!(exact_div(&f, q(5, 1)).unwrap(), TruncatedSeries::monomial(1, 2, BigInt::from(5)));
        let g = TruncatedSeries::one_minus(2, 3).shift(-4);
        assert_eq!(exact_div(&g, q(3, 2)).unwrap(), TruncatedSeries::monomial(2, -4, BigInt::one()));
    }

    #[test]
    fn theta_pentagonal() {
        let t = theta(ThetaParams::new(q(3, 1), q(1, 2)).unwrap(), 30).unwrap();
        let expect = [(0, 1), (1, -1), (2, -1), (5, 1), (7, 1), (12, -1), (15, -1), (22, 1), (26, 1)];
        let want = TruncatedSeries::from_terms(1, expect.iter().map(|&(e, c)| (e, BigInt::from(c))), Some(30));
        assert_eq!(t, want);
        assert_eq!(t, q_pochhammer(30));
        assert!(ThetaParams::new(q(3, 1), q(1, 3)).is_err());
    }

    #[test]
    fn theta_identities() {
        let (b, c) = (q(5, 1), q(7, 2));
        let t1 = theta(ThetaParams::new(b, c).unwrap(), 50).unwrap();
        let t2 = theta(ThetaParams::new(b, -c).unwrap(), 50).unwrap();
        assert_eq!(t1, t2);
        let (b, c) = (q(3, 1), q(1, 2));
        let lhs = theta(ThetaParams::new(b, c).unwrap(), 50).unwrap();
        let shift = (b / 2 + c).to_integer();
        let rhs = theta(ThetaParams::new(b, b + c).unwrap(), 50 - shift).unwrap().shift(shift).neg();
        assert!(lhs.agrees_to(&rhs, q(50, 1)));
    }

    #[test]
    fn pochhammer_examples() {
        let p = q_pochhammer(15);
        assert_eq!(p, TruncatedSeries::from_coeffs(0, &[1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1], Some(15)));
        let empty = pochhammer(q(20, 1), q(1, 1), 15).unwrap();
        assert!(empty.agrees_to(&TruncatedSeries::one(), q(15, 1)));
        assert!(matches!(pochhammer(q(0, 1), q(0, 1), 5), Err(Error::Divergent(_))));
        assert_eq!(product_one_minus(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14], 15), p);
    }

    #[test]
    fn json_roundtrip() {
        let f = TruncatedSeries::from_terms(3, [(-2, BigInt::from(7)), (4, BigInt::from(-1))], Some(9));
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"denom":3,"order":9,"terms":[[-2,"7"],[4,"-1"]]}"#);
        let g: TruncatedSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    fn arb_poly() -> impl Strategy<Value = TruncatedSeries> {
        (-5i64..5, prop::collection::vec(-4i64..5, 1..8)).prop_map(|(s, c)| TruncatedSeries::from_coeffs(s, &c, None))
    }

    proptest! {
        #[test]
        fn degree_is_additive(f in arb_poly(), g in arb_poly()) {
            prop_assume!(!f.is_zero() && !g.is_zero());
            let h = f.mul(&g);
            prop_assert_eq!(h.min_exp(), Some(f.min_exp().unwrap() + g.min_exp().unwrap()));
        }

        #[test]
        fn exact_div_then_mul(f in arb_poly(), e in 1i64..6) {
            let prod = f.mul(&TruncatedSeries::one_minus(1, e));
            let back = exact_div(&prod, Q64::from_integer(e)).unwrap();
            prop_assert_eq!(back.mul(&TruncatedSeries::one_minus(1, e)), prod);
            prop_assert_eq!(back, f);
        }

        #[test]
        fn geometric_is_two_sided(num in 1i64..7, den in 1i64..4, order in 1i64..25) {
            let e = Q64::new(num, den);
            let g = geometric_inverse(e, order).unwrap();
            let d = *e.denom();
            let b = TruncatedSeries::one_minus(d, (e * d).to_integer());
            prop_assert!(g.mul(&b).agrees_to(&TruncatedSeries::one(), Q64::from_integer(order)));
            prop_assert!(b.mul(&g).agrees_to(&TruncatedSeries::one(), Q64::from_integer(order)));
        }

        #[test]
        fn truncation_respected(f in arb_poly(), o in -3i64..8) {
            let t = f.truncate(o);
            prop_assert!(t.terms().keys().all(|&e| e < o));
        }
    }
}
