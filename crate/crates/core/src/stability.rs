//! Quasi-polynomials, stable coefficients, tail series and their evaluation.
//!
//! Throughout, a family `f_n(q)` is studied through `Ĵ_n = q^{-δ*(n)} f_n` and
//! its tail is written in the variable `x = q^n`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jones::{minimizer_closed_form, shifted_jones, TorusKnot};
use crate::lie::{Algebra, RootSystemData, Weight};
use crate::mult::{lattice_hull, plethysm_mult_in};
use crate::qseries::{pochhammer, q_pochhammer, theta, ThetaParams, TruncatedSeries, Q64};

type BQ = BigRational;

fn bq(x: i64) -> BQ {
    BQ::from_integer(BigInt::from(x))
}

fn q64_to_bq(x: Q64) -> BQ {
    BQ::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

// ---------------------------------------------------------------------------
// Quasi-polynomials

/// `n ↦ Σ_j c_{n mod P, j} n^j`, kept in canonical form (minimal period,
/// trailing zero coefficients removed).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuasiPolynomial {
    coeffs: Vec<Vec<BQ>>,
}

fn trim(p: &mut Vec<BQ>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_eval(p: &[BQ], n: i64) -> BQ {
    let x = bq(n);
    p.iter().rev().fold(BQ::zero(), |acc, c| acc * &x + c)
}

fn poly_add(a: &[BQ], b: &[BQ]) -> Vec<BQ> {
    let mut out = vec![BQ::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    trim(&mut out);
    out
}

/// Lagrange interpolation through the given points, in the monomial basis.
fn interpolate(points: &[(i64, BQ)]) -> Vec<BQ> {
    let mut out = vec![BQ::zero(); points.len()];
    for (i, (xi, yi)) in points.iter().enumerate() {
        let mut basis = vec![BQ::one()];
        let mut den = BQ::one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![BQ::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * bq(*xj);
            }
            basis = next;
            den *= bq(xi - xj);
        }
        let s = yi / den;
        for (k, c) in basis.iter().enumerate() {
            out[k] += c * &s;
        }
    }
    trim(&mut out);
    out
}

impl QuasiPolynomial {
    /// Builds from per-residue coefficient lists `coeffs[r][j]`.
    pub fn new(mut coeffs: Vec<Vec<BQ>>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Vec::new());
        }
        for p in coeffs.iter_mut() {
            trim(p);
        }
        let big = coeffs.len();
        for p in 1..=big {
            if big.is_multiple_of(p) && (0..big).all(|r| coeffs[r] == coeffs[r % p]) {
                coeffs.truncate(p);
                break;
            }
        }
        QuasiPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        QuasiPolynomial { coeffs: vec![Vec::new()] }
    }

    pub fn constant(c: BQ) -> Self {
        Self::new(vec![vec![c]])
    }

    pub fn polynomial(c: Vec<BQ>) -> Self {
        Self::new(vec![c])
    }

    pub fn period(&self) -> usize {
        self.coeffs.len()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|p| p.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[Vec<BQ>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|p| p.is_empty())
    }

    pub fn eval(&self, n: i64) -> BQ {
        poly_eval(&self.coeffs[n.rem_euclid(self.period() as i64) as usize], n)
    }

    pub fn eval_int(&self, n: i64) -> Option<BigInt> {
        let v = self.eval(n);
        v.is_integer().then(|| v.to_integer())
    }

    pub fn add(&self, other: &Self) -> Self {
        let l = self.period().lcm(&other.period());
        Self::new((0..l).map(|r| poly_add(&self.coeffs[r % self.period()], &other.coeffs[r % other.period()])).collect())
    }

    pub fn scale(&self, s: &BQ) -> Self {
        Self::new(self.coeffs.iter().map(|p| p.iter().map(|c| c * s).collect()).collect())
    }

    pub fn scale_int(&self, s: &BigInt) -> Self {
        self.scale(&BQ::from_integer(s.clone()))
    }

    pub fn neg(&self) -> Self {
        self.scale(&bq(-1))
    }

    /// True when both agree at every `n ≡ n0 (mod m)`.
    pub fn agrees_on(&self, other: &Self, n0: i64, m: i64) -> bool {
        let l = self.period().lcm(&other.period()) as i64;
        let d = self.degree().max(other.degree()) as i64;
        (0..l * (d + 1) + 1).all(|j| self.eval(n0 + m * j) == other.eval(n0 + m * j))
    }

    /// Integer values on `range`.
    pub fn is_integer_valued_on(&self, range: std::ops::Range<i64>) -> bool {
        range.into_iter().all(|n| self.eval(n).is_integer())
    }
}

fn fmt_poly(p: &[BQ]) -> String {
    if p.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (j, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (sign, a) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
        if s.is_empty() {
            if sign == "-" {
                s.push('-');
            }
        } else {
            s.push_str(&format!(" {} ", sign));
        }
        match j {
            0 => s.push_str(&a.to_string()),
            _ => {
                if !a.is_one() {
                    s.push_str(&a.to_string());
                }
                s.push('n');
                if j > 1 {
                    s.push_str(&format!("^{}", j));
                }
            }
        }
    }
    s
}

impl fmt::Display for QuasiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.period() == 1 {
            return write!(f, "{}", fmt_poly(&self.coeffs[0]));
        }
        let parts: Vec<String> = self.coeffs.iter().enumerate().map(|(r, p)| format!("n≡{}: {}", r, fmt_poly(p))).collect();
        write!(f, "[{}]", parts.join("; "))
    }
}

impl Serialize for QuasiPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("QuasiPolynomial", 3)?;
        st.serialize_field("period", &self.period())?;
        st.serialize_field("degree", &self.degree())?;
        let c: Vec<Vec<String>> = self.coeffs.iter().map(|p| p.iter().map(|x| x.to_string()).collect()).collect();
        st.serialize_field("coeffs", &c)?;
        st.end()
    }
}

pub const MAX_PERIOD: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiFit {
    pub qp: QuasiPolynomial,
    /// Smallest sample `n` from which every later sample matches the fit.
    pub threshold: i64,
}

fn try_fit(s: &[(i64, BQ)], p: usize, d: usize) -> Option<QuasiFit> {
    let mut classes: Vec<Vec<&(i64, BQ)>> = vec![Vec::new(); p];
    for x in s {
        classes[x.0.rem_euclid(p as i64) as usize].push(x);
    }
    if classes.iter().all(|c| c.is_empty()) {
        return None;
    }
    let mut coeffs = vec![Vec::new(); p];
    for (r, cl) in classes.iter().enumerate() {
        if cl.is_empty() {
            continue;
        }
        if cl.len() < d + 3 {
            return None;
        }
        let train: Vec<(i64, BQ)> = cl[cl.len() - d - 1..].iter().map(|x| (*x).clone()).collect();
        let poly = interpolate(&train);
        if poly.len() > d + 1 {
            return None;
        }
        let hold = &cl[cl.len() - d - 3..cl.len() - d - 1];
        if hold.iter().any(|(n, v)| poly_eval(&poly, *n) != *v) {
            return None;
        }
        coeffs[r] = poly;
    }
    let qp = QuasiPolynomial::new(coeffs);
    let mut threshold = s[0].0;
    let mut last = s[s.len() - 1].0;
    for (n, v) in s.iter().rev() {
        if qp.eval(*n) != *v {
            threshold = last;
            break;
        }
        last = *n;
    }
    Some(QuasiFit { qp, threshold })
}

/// Fits a quasi-polynomial of period `≤ 24` and degree `≤ max_degree`, trying
/// periods in increasing order and the least degree first. Each residue class
/// is trained on its last `d+1` samples and validated on the two before them.
pub fn fit_quasi_polynomial(samples: &[(i64, BQ)], max_degree: usize) -> Result<QuasiFit> {
    let mut s = samples.to_vec();
    s.sort_by_key(|x| x.0);
    s.dedup_by_key(|x| x.0);
    if s.is_empty() {
        return Err(Error::NotQuasiPolynomial);
    }
    for p in 1..=MAX_PERIOD {
        for d in 0..=max_degree {
            if let Some(f) = try_fit(&s, p, d) {
                return Ok(f);
            }
        }
    }
    Err(Error::NotQuasiPolynomial)
}

/// Degree-`≤ 2` quasi-polynomial fit of `δ*(n)`.
pub fn degree_quasipoly_fit(deltas: &[(i64, Q64)]) -> Result<QuasiFit> {
    let s: Vec<(i64, BQ)> = deltas.iter().map(|(n, d)| (*n, q64_to_bq(*d))).collect();
    fit_quasi_polynomial(&s, 2)
}

// ---------------------------------------------------------------------------
// Stable coefficients

#[derive(Clone, Debug, Serialize)]
pub struct StableRow {
    pub n: i64,
    pub delta_star: String,
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct StableCoefficients {
    pub k_max: usize,
    pub rows: BTreeMap<i64, Vec<BigInt>>,
}

impl StableCoefficients {
    pub fn get(&self, n: i64, k: usize) -> Option<&BigInt> {
        self.rows.get(&n).and_then(|r| r.get(k))
    }

    /// `(n, k, a_k(n+2) - 2a_k(n+1) + a_k(n))` for every nonzero second difference.
    pub fn second_differences(&self, ns: std::ops::RangeInclusive<i64>) -> Vec<(i64, usize, BigInt)> {
        let mut out = Vec::new();
        for n in ns {
            for k in 0..=self.k_max {
                if let (Some(a0), Some(a1), Some(a2)) = (self.get(n, k), self.get(n + 1, k), self.get(n + 2, k)) {
                    let d = a2 - BigInt::from(2) * a1 + a0;
                    if !d.is_zero() {
                        out.push((n, k, d));
                    }
                }
            }
        }
        out
    }
}

/// `a_k(n)`: the coefficient of `q^{δ*(n)+k}` in `f_n`, for `k ≤ k_max`.
pub fn stable_coefficients(family: &[(i64, TruncatedSeries)], k_max: usize) -> StableCoefficients {
    let rows = family
        .iter()
        .map(|(n, f)| {
            let d = f.denom();
            let base = f.min_exp().unwrap_or(0);
            (*n, (0..=k_max as i64).map(|k| f.coeff(base + k * d)).collect())
        })
        .collect();
    StableCoefficients { k_max, rows }
}

// ---------------------------------------------------------------------------
// Tail series

/// One `x`-power of a tail: a `q`-series in `q^{1/D}` with quasi-polynomial
/// coefficients, known below `q^{order/D}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailRow {
    pub terms: BTreeMap<i64, QuasiPolynomial>,
    pub order: i64,
}

impl TailRow {
    fn empty(order: i64) -> Self {
        TailRow { terms: BTreeMap::new(), order }
    }

    fn add_term(&mut self, e: i64, c: &QuasiPolynomial) {
        if e >= self.order || c.is_zero() {
            return;
        }
        let v = match self.terms.remove(&e) {
            Some(old) => old.add(c),
            None => c.clone(),
        };
        if !v.is_zero() {
            self.terms.insert(e, v);
        }
    }

    fn valuation(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(self.order)
    }

    fn shifted(&self, e: i64) -> Self {
        TailRow { terms: self.terms.iter().map(|(k, c)| (k + e, c.clone())).collect(), order: self.order + e }
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = TailRow::empty(self.order.min(other.order));
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(*e, c);
        }
        out
    }

    fn neg(&self) -> Self {
        TailRow { terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(), order: self.order }
    }

    fn truncate(&self, o: i64) -> Self {
        let o = o.min(self.order);
        TailRow { terms: self.terms.range(..o).map(|(e, c)| (*e, c.clone())).collect(), order: o }
    }

    /// Product with an integer series over the same denominator.
    fn mul_series(&self, s: &TruncatedSeries) -> Self {
        let sv = s.min_exp().or(s.order());
        let order = match (sv, s.order()) {
            (None, _) => return TailRow::empty(i64::MAX / 4),
            (Some(v), so) => min_opt(Some(self.order + v), so.map(|o| o + self.valuation())).unwrap(),
        };
        let mut out = TailRow::empty(order);
        for (e1, c1) in &self.terms {
            for (e2, c2) in s.terms() {
                if e1 + e2 >= order {
                    break;
                }
                out.add_term(e1 + e2, &c1.scale_int(c2));
            }
        }
        out
    }

    fn rescale(&self, k: i64) -> Self {
        TailRow { terms: self.terms.iter().map(|(e, c)| (e * k, c.clone())).collect(), order: self.order * k }
    }
}

/// A truncated tail `F(n, x, q) = Σ_k Φ_k(n, q) x^k`, valid for `n ≡ n0 (mod m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailSeries {
    denom: i64,
    residue: (i64, i64),
    rows: Vec<TailRow>,
}

impl TailSeries {
    pub fn new(denom: i64, residue: (i64, i64), rows: Vec<TailRow>) -> Self {
        assert!(denom > 0 && residue.1 > 0);
        TailSeries { denom, residue: (residue.0.rem_euclid(residue.1), residue.1), rows }
    }

    /// Constant coefficients taken from integer series, truncated at `q^{q_order}`.
    pub fn from_const_rows(rows: &[TruncatedSeries], q_order: i64) -> Self {
        Self::from_linear_rows(rows, &[], q_order)
    }

    /// Coefficients `c0 + n·c1` from two lists of integer series.
    pub fn from_linear_rows(c0: &[TruncatedSeries], c1: &[TruncatedSeries], q_order: i64) -> Self {
        let d = c0.iter().chain(c1).fold(1i64, |d, s| d.lcm(&s.denom()));
        let o = q_order * d;
        let len = c0.len().max(c1.len());
        let zero = TruncatedSeries::zero();
        let rows = (0..len)
            .map(|k| {
                let a = c0.get(k).unwrap_or(&zero).rescale(d).truncate(o);
                let b = c1.get(k).unwrap_or(&zero).rescale(d).truncate(o);
                let order = min_opt(a.order(), b.order()).unwrap_or(o);
                let mut row = TailRow::empty(order);
                for (e, c) in a.terms() {
                    row.add_term(*e, &QuasiPolynomial::constant(BQ::from_integer(c.clone())));
                }
                for (e, c) in b.terms() {
                    row.add_term(*e, &QuasiPolynomial::polynomial(vec![BQ::zero(), BQ::from_integer(c.clone())]));
                }
                row
            })
            .collect();
        TailSeries::new(d, (0, 1), rows)
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn residue(&self) -> (i64, i64) {
        self.residue
    }

    pub fn neg(&self) -> Self {
        TailSeries { denom: self.denom, residue: self.residue, rows: self.rows.iter().map(TailRow::neg).collect() }
    }

    pub fn with_residue(mut self, residue: (i64, i64)) -> Self {
        self.residue = (residue.0.rem_euclid(residue.1), residue.1);
        self
    }

    pub fn rows(&self) -> &[TailRow] {
        &self.rows
    }

    pub fn x_order(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// `q`-order (in integer units) below which every row is known.
    pub fn q_order(&self) -> Q64 {
        let o = self.rows.iter().map(|r| r.order).min().unwrap_or(0);
        Q64::new(o, self.denom)
    }

    pub fn rescale(&self, d: i64) -> Self {
        assert!(d % self.denom == 0);
        let k = d / self.denom;
        TailSeries { denom: d, residue: self.residue, rows: self.rows.iter().map(|r| r.rescale(k)).collect() }
    }

    pub fn reduced(&self) -> Self {
        let mut g = self.denom;
        for r in &self.rows {
            g = g.gcd(&r.order);
            for e in r.terms.keys() {
                g = g.gcd(e);
            }
        }
        if g <= 1 {
            return self.clone();
        }
        let rows = self
            .rows
            .iter()
            .map(|r| TailRow { terms: r.terms.iter().map(|(e, c)| (e / g, c.clone())).collect(), order: r.order / g })
            .collect();
        TailSeries { denom: self.denom / g, residue: self.residue, rows }
    }

    /// Keeps `x^0 .. x^{x_order}` and `q`-powers below `q^{q_order}`.
    pub fn truncate(&self, x_order: usize, q_order: i64) -> Self {
        let o = q_order * self.denom;
        let mut rows: Vec<TailRow> = self.rows.iter().take(x_order + 1).map(|r| r.truncate(o)).collect();
        while rows.len() < x_order + 1 {
            rows.push(TailRow::empty(i64::MIN / 4));
        }
        TailSeries { denom: self.denom, residue: self.residue, rows }
    }

    fn num(&self, d: Q64) -> Result<i64> {
        let v = d * self.denom;
        if !v.is_integer() {
            return Err(Error::NonIntegralExponent(d.to_string()));
        }
        Ok(v.to_integer())
    }

    fn adapt(&self, d: Q64) -> Self {
        let nd = self.denom.lcm(d.denom());
        if nd == self.denom {
            self.clone()
        } else {
            self.rescale(nd)
        }
    }

    /// `F/(1 - q^d x^c)`: `ψ_k = Σ_{i+jc=k} φ_i q^{jd}`. For `c = 0` this is
    /// multiplication of every row by `1/(1 - q^d)`, which needs `d > 0`.
    pub fn fg_transform(&self, c: usize, d: Q64) -> Result<Self> {
        let f = self.adapt(d);
        let dn = f.num(d)?;
        if c == 0 {
            if dn <= 0 {
                return Err(Error::NonExpandable(d.to_string()));
            }
            let rows = f
                .rows
                .iter()
                .map(|r| {
                    let span = (r.order - r.valuation()).max(0);
                    let g = TruncatedSeries::from_terms(
                        f.denom,
                        (0..).map(|j| j * dn).take_while(|x| *x < span).map(|x| (x, BigInt::one())),
                        Some(span),
                    );
                    r.mul_series(&g).truncate(r.order)
                })
                .collect();
            return Ok(TailSeries { denom: f.denom, residue: f.residue, rows });
        }
        let rows = (0..f.rows.len())
            .map(|k| {
                let mut acc: Option<TailRow> = None;
                let mut j = 0usize;
                while j * c <= k {
                    let t = f.rows[k - j * c].shifted(j as i64 * dn);
                    acc = Some(match acc {
                        None => t,
                        Some(a) => a.add(&t),
                    });
                    j += 1;
                }
                acc.unwrap()
            })
            .collect();
        Ok(TailSeries { denom: f.denom, residue: f.residue, rows })
    }

    /// `G·(1 - q^d x^c)`, the inverse of [`TailSeries::fg_transform`].
    pub fn fg_inverse(&self, c: usize, d: Q64) -> Result<Self> {
        let f = self.adapt(d);
        let dn = f.num(d)?;
        let rows = (0..f.rows.len())
            .map(|k| {
                if k >= c {
                    f.rows[k].add(&f.rows[k - c].shifted(dn).neg())
                } else if c == 0 {
                    f.rows[k].add(&f.rows[k].shifted(dn).neg())
                } else {
                    f.rows[k].clone()
                }
            })
            .collect();
        Ok(TailSeries { denom: f.denom, residue: f.residue, rows })
    }

    /// `Φ_k(n, q)` as integer series, for `n` in the residue class.
    pub fn eval(&self, n: i64) -> Result<Vec<TruncatedSeries>> {
        if (n - self.residue.0).rem_euclid(self.residue.1) != 0 {
            return Err(Error::Tail(format!("n={} outside residue class {:?}", n, self.residue)));
        }
        self.rows
            .iter()
            .map(|r| {
                let mut terms = Vec::new();
                for (e, c) in &r.terms {
                    let v = c.eval(n);
                    if !v.is_integer() {
                        return Err(Error::Tail(format!("non-integral coefficient {} at n={}", v, n)));
                    }
                    terms.push((*e, v.to_integer()));
                }
                Ok(TruncatedSeries::from_terms(self.denom, terms, Some(r.order)))
            })
            .collect()
    }

    fn common_residue(&self, other: &Self) -> Option<(i64, i64)> {
        let (a, m) = self.residue;
        let (b, n) = other.residue;
        if m % n == 0 && (a - b).rem_euclid(n) == 0 {
            Some((a, m))
        } else if n % m == 0 && (b - a).rem_euclid(m) == 0 {
            Some((b, n))
        } else {
            None
        }
    }

    /// Compares coefficient by coefficient up to `x^{x_order}` and below `q^{q_order}`
    /// on the common residue class; returns a description of the first mismatch.
    pub fn compare(&self, other: &Self, x_order: usize, q_order: i64) -> std::result::Result<(), String> {
        let (n0, m) = self.common_residue(other).ok_or("disjoint residue classes")?;
        let d = self.denom.lcm(&other.denom);
        let (f, g) = (self.rescale(d), other.rescale(d));
        let o = q_order * d;
        for k in 0..=x_order {
            let (Some(a), Some(b)) = (f.rows.get(k), g.rows.get(k)) else {
                return Err(format!("x^{} not available", k));
            };
            if a.order < o || b.order < o {
                return Err(format!("x^{} known only below q^{}", k, Q64::new(a.order.min(b.order), d)));
            }
            let zero = QuasiPolynomial::zero();
            let keys: std::collections::BTreeSet<i64> = a.terms.range(..o).chain(b.terms.range(..o)).map(|(e, _)| *e).collect();
            for e in keys {
                let ca = a.terms.get(&e).unwrap_or(&zero);
                let cb = b.terms.get(&e).unwrap_or(&zero);
                if !ca.agrees_on(cb, n0, m) {
                    return Err(format!("x^{} q^{}: {} vs {}", k, Q64::new(e, d), ca, cb));
                }
            }
        }
        Ok(())
    }

    pub fn agrees_with(&self, other: &Self, x_order: usize, q_order: i64) -> bool {
        self.compare(other, x_order, q_order).is_ok()
    }

    /// When every coefficient is `c0 + n·c1` with integer `c0, c1`, returns
    /// the two series for each `x`-power.
    pub fn linear_parts(&self) -> Option<Vec<(TruncatedSeries, TruncatedSeries)>> {
        self.rows
            .iter()
            .map(|r| {
                let mut c0 = Vec::new();
                let mut c1 = Vec::new();
                for (e, qp) in &r.terms {
                    if qp.period() != 1 || qp.degree() > 1 {
                        return None;
                    }
                    let p = &qp.coeffs()[0];
                    let get = |i: usize| p.get(i).cloned().unwrap_or_else(BQ::zero);
                    let (a, b) = (get(0), get(1));
                    if !a.is_integer() || !b.is_integer() {
                        return None;
                    }
                    c0.push((*e, a.to_integer()));
                    c1.push((*e, b.to_integer()));
                }
                Some((
                    TruncatedSeries::from_terms(self.denom, c0, Some(r.order)),
                    TruncatedSeries::from_terms(self.denom, c1, Some(r.order)),
                ))
            })
            .collect()
    }
}

impl fmt::Display for TailSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tail on n ≡ {} (mod {})", self.residue.0, self.residue.1)?;
        for (k, r) in self.rows.iter().enumerate() {
            let mut parts = Vec::new();
            for (e, c) in &r.terms {
                let ex = Q64::new(*e, self.denom);
                parts.push(format!("({})q^{}", c, ex));
            }
            if parts.is_empty() {
                parts.push("0".into());
            }
            writeln!(f, "x^{}: {} + O(q^{})", k, parts.join(" + "), Q64::new(r.order, self.denom))?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct RowJson {
    k: usize,
    order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    series_const: Option<TruncatedSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    series_linear_n: Option<TruncatedSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quasi_terms: Option<Vec<(String, QuasiPolynomial)>>,
}

impl Serialize for TailSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let lin = self.linear_parts();
        let rows: Vec<RowJson> = self
            .rows
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let order = Q64::new(r.order, self.denom).to_string();
                match &lin {
                    Some(l) => RowJson {
                        k,
                        order,
                        series_const: Some(l[k].0.clone()),
                        series_linear_n: Some(l[k].1.clone()),
                        quasi_terms: None,
                    },
                    None => RowJson {
                        k,
                        order,
                        series_const: None,
                        series_linear_n: None,
                        quasi_terms: Some(
                            r.terms.iter().map(|(e, c)| (Q64::new(*e, self.denom).to_string(), c.clone())).collect(),
                        ),
                    },
                }
            })
            .collect();
        let mut st = s.serialize_struct("TailSeries", 3)?;
        st.serialize_field("residue", &[self.residue.0, self.residue.1])?;
        st.serialize_field("denom", &self.denom)?;
        st.serialize_field("phi", &rows)?;
        st.end()
    }
}

/// Free-function form of [`TailSeries::fg_transform`].
pub fn lemma_fg_transform(f: &TailSeries, c: usize, d: Q64) -> Result<TailSeries> {
    f.fg_transform(c, d)
}

pub fn lemma_fg_inverse(g: &TailSeries, c: usize, d: Q64) -> Result<TailSeries> {
    g.fg_inverse(c, d)
}

// ---------------------------------------------------------------------------
// Truncated rational series and a linear solver over them

#[derive(Clone, Debug)]
struct RSeries {
    terms: BTreeMap<i64, BQ>,
    order: Option<i64>,
}

impl RSeries {
    fn exact_zero() -> Self {
        RSeries { terms: BTreeMap::new(), order: None }
    }

    fn monomial(e: i64, c: BQ) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        RSeries { terms, order: None }
    }

    fn from_series(s: &TruncatedSeries, w: i64) -> Self {
        let t = s.truncate(w);
        RSeries { terms: t.terms().iter().map(|(e, c)| (*e, BQ::from_integer(c.clone()))).collect(), order: t.order() }
    }

    fn val(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Valuation lower bound; `None` for the exact zero.
    fn lower(&self) -> Option<i64> {
        self.val().or(self.order)
    }

    fn from_map(mut terms: BTreeMap<i64, BQ>, order: Option<i64>) -> Self {
        terms.retain(|e, c| !c.is_zero() && order.is_none_or(|o| *e < o));
        RSeries { terms, order }
    }

    fn sub(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        for (e, c) in &o.terms {
            *t.entry(*e).or_insert_with(BQ::zero) -= c;
        }
        Self::from_map(t, min_opt(self.order, o.order))
    }

    fn mul(&self, o: &Self) -> Self {
        let (Some(va), Some(vb)) = (self.lower(), o.lower()) else {
            return Self::exact_zero();
        };
        let order = min_opt(self.order.map(|x| x + vb), o.order.map(|x| x + va));
        let mut t: BTreeMap<i64, BQ> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = e1 + e2;
                if order.is_some_and(|x| e >= x) {
                    break;
                }
                *t.entry(e).or_insert_with(BQ::zero) += c1 * c2;
            }
        }
        Self::from_map(t, order)
    }

    fn inv(&self, rel: i64) -> Option<Self> {
        let v = self.val()?;
        let p = match self.order {
            Some(o) => (o - v).min(rel),
            None => rel,
        };
        if p <= 0 {
            return None;
        }
        let a: Vec<(usize, &BQ)> = self.terms.range(v..v + p).map(|(e, c)| ((e - v) as usize, c)).collect();
        let inv0 = a[0].1.recip();
        let p = p as usize;
        let mut w = vec![BQ::zero(); p];
        w[0] = inv0.clone();
        for i in 1..p {
            let mut s = BQ::zero();
            for (j, c) in a.iter().skip(1) {
                if *j > i {
                    break;
                }
                s += *c * &w[i - j];
            }
            w[i] = -(s * &inv0);
        }
        let terms = w.into_iter().enumerate().map(|(i, c)| (i as i64 - v, c)).collect();
        Some(Self::from_map(terms, Some(p as i64 - v)))
    }

    /// Zero below its known order.
    fn is_known_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Gauss–Jordan elimination pivoting on minimal valuation.
fn solve_series_system(mut a: Vec<Vec<RSeries>>, mut b: Vec<RSeries>, rel: i64) -> Option<Vec<RSeries>> {
    let r = a.len();
    for c in 0..r {
        let (_, i) = (c..r).filter_map(|i| a[i][c].val().map(|v| (v, i))).min()?;
        a.swap(c, i);
        b.swap(c, i);
        let inv = a[c][c].inv(rel)?;
        for x in &mut a[c][c..r] {
            *x = x.mul(&inv);
        }
        b[c] = b[c].mul(&inv);
        for i in 0..r {
            if i == c || a[i][c].lower().is_none() {
                continue;
            }
            let f = a[i][c].clone();
            let pivot = a[c].clone();
            for (x, p) in a[i][c..r].iter_mut().zip(&pivot[c..r]) {
                *x = x.sub(&f.mul(p));
            }
            let t = f.mul(&b[c]);
            b[i] = b[i].sub(&t);
        }
    }
    Some(b)
}

// ---------------------------------------------------------------------------
// Empirical tail detection

/// A factor `1 - x^c q^d` with `x = q^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClearingFactor {
    pub c: i64,
    #[serde(serialize_with = "ser_q64")]
    pub d: Q64,
}

fn ser_q64<S: Serializer>(x: &Q64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectedTail {
    pub tail: TailSeries,
    /// Smallest sampled `n` from which the partial-sum defect condition holds.
    pub threshold: i64,
    /// Period of the fitted numerator coefficients.
    pub period: usize,
    /// Largest `x`-power kept in the cleared numerator.
    pub numerator_x_degree: usize,
    /// Degree in `n` of the numerator coefficients.
    pub n_degree: usize,
    pub working_order: i64,
}

const MAX_DETECT_PERIOD: usize = 6;
const MAX_N_DEGREE: usize = 2;
const EXTRA_X: usize = 2;

struct Model {
    period: usize,
    kn: usize,
    dg: usize,
}

/// Fits `g_n ≈ Σ_{k≤K_N, j≤Dg} n^j q^{kn} U_{k,j}(q)` for one residue class
/// by solving on `nodes` and checking on `checks`.
fn fit_class(
    g: &BTreeMap<i64, TruncatedSeries>,
    nodes: &[i64],
    checks: &[i64],
    m: &Model,
    d: i64,
    need: i64,
) -> std::result::Result<(Vec<RSeries>, i64), String> {
    let r = (m.kn + 1) * (m.dg + 1);
    let top = nodes[0];
    let loss = (m.kn * (m.kn + 1) / 2) as i64 * top * d;
    let mut extra = loss + 4 * d;
    for _ in 0..4 {
        let w = need + extra;
        let mut a = Vec::with_capacity(r);
        let mut b = Vec::with_capacity(r);
        for &n in nodes {
            let mut row = Vec::with_capacity(r);
            for k in 0..=m.kn {
                for j in 0..=m.dg {
                    row.push(RSeries::monomial(k as i64 * n * d, BQ::from_integer(BigInt::from(n).pow(j as u32))));
                }
            }
            a.push(row);
            b.push(RSeries::from_series(&g[&n], w));
        }
        let Some(u) = solve_series_system(a, b, w) else {
            return Err("singular system".into());
        };
        let short = u.iter().any(|s| s.order.is_some_and(|o| o < need));
        if short {
            extra *= 2;
            continue;
        }
        for &n in checks {
            let mut res = RSeries::from_series(&g[&n], w);
            for k in 0..=m.kn {
                for j in 0..=m.dg {
                    let mono = RSeries::monomial(k as i64 * n * d, BQ::from_integer(BigInt::from(n).pow(j as u32)));
                    res = res.sub(&mono.mul(&u[k * (m.dg + 1) + j]));
                }
            }
            if res.order.is_some_and(|o| o < need) {
                return Err(format!("check at n={} known only below {}", n, Q64::new(res.order.unwrap(), d)));
            }
            if !res.is_known_zero() {
                let e = res.val().unwrap();
                return Err(format!("check at n={} fails at q^{}", n, Q64::new(e, d)));
            }
        }
        return Ok((u, w));
    }
    Err("precision not reached".into())
}

/// Detects the tail of a family `f_n` (already shifted to `δ* = 0`) whose
/// numerator `f_n ∏ (1 - q^{c n + d})` is fitted by quasi-polynomial
/// coefficients in the powers `q^{kn}`.
pub fn detect_tail(
    samples: &[(i64, TruncatedSeries)],
    clearing: &[ClearingFactor],
    x_order: usize,
    q_order: i64,
) -> Result<DetectedTail> {
    if samples.is_empty() {
        return Err(Error::NotStable("no samples".into()));
    }
    let d = clearing
        .iter()
        .fold(samples.iter().fold(1i64, |d, (_, s)| d.lcm(&s.denom())), |d, f| d.lcm(f.d.denom()));
    let mut g: BTreeMap<i64, TruncatedSeries> = BTreeMap::new();
    let mut f: BTreeMap<i64, TruncatedSeries> = BTreeMap::new();
    for (n, s) in samples {
        let s = s.rescale(d);
        let mut t = s.clone();
        for cf in clearing {
            let e = cf.d * d + Q64::from_integer(cf.c * n * d);
            if e.to_integer() <= 0 {
                return Err(Error::NonExpandable(Q64::new(e.to_integer(), d).to_string()));
            }
            t = t.mul(&TruncatedSeries::one_minus(d, e.to_integer()));
        }
        g.insert(*n, t);
        f.insert(*n, s);
    }
    let need = q_order * d;
    let mut models = Vec::new();
    for period in 1..=MAX_DETECT_PERIOD {
        let mut cfg: Vec<(usize, usize)> =
            (x_order..=x_order + EXTRA_X).flat_map(|kn| (0..=MAX_N_DEGREE).map(move |dg| (kn, dg))).collect();
        cfg.sort_by_key(|(kn, dg)| ((kn + 1) * (dg + 1), *kn, *dg));
        models.extend(cfg.into_iter().map(|(kn, dg)| Model { period, kn, dg }));
    }
    let mut trace = Vec::new();
    'model: for m in &models {
        let r = (m.kn + 1) * (m.dg + 1);
        let mut classes = Vec::new();
        for c in 0..m.period as i64 {
            let ns: Vec<i64> = g.keys().rev().copied().filter(|n| *n >= 1 && n.rem_euclid(m.period as i64) == c).collect();
            if ns.len() < r + 2 {
                trace.push(format!("P={} K={} D={}: too few samples", m.period, m.kn, m.dg));
                continue 'model;
            }
            classes.push((ns[..r].to_vec(), ns[r..r + 2].to_vec()));
        }
        let fits: Vec<_> = classes.par_iter().map(|(nodes, checks)| fit_class(&g, nodes, checks, m, d, need)).collect();
        let mut us = Vec::new();
        let mut w_max = 0;
        for (c, fit) in fits.into_iter().enumerate() {
            match fit {
                Ok((u, w)) => {
                    us.push(u);
                    w_max = w_max.max(w);
                }
                Err(e) => {
                    trace.push(format!("P={} K={} D={} class {}: {}", m.period, m.kn, m.dg, c, e));
                    continue 'model;
                }
            }
        }
        let mut rows = Vec::new();
        for k in 0..=m.kn {
            let mut order = i64::MAX;
            let mut exps = std::collections::BTreeSet::new();
            for u in &us {
                for j in 0..=m.dg {
                    let s = &u[k * (m.dg + 1) + j];
                    order = order.min(s.order.unwrap_or(i64::MAX));
                    exps.extend(s.terms.keys().copied());
                }
            }
            let order = if order == i64::MAX { need } else { order };
            let mut row = TailRow::empty(order);
            for e in exps {
                let coeffs: Vec<Vec<BQ>> = us
                    .iter()
                    .map(|u| {
                        (0..=m.dg).map(|j| u[k * (m.dg + 1) + j].terms.get(&e).cloned().unwrap_or_else(BQ::zero)).collect()
                    })
                    .collect();
                row.add_term(e, &QuasiPolynomial::new(coeffs));
            }
            rows.push(row);
        }
        let mut tail = TailSeries::new(d, (0, 1), rows);
        for cf in clearing {
            tail = tail.fg_transform(cf.c as usize, cf.d)?;
        }
        let tail = tail.truncate(x_order, q_order);
        let threshold = defect_threshold(&f, &tail, x_order)?;
        return Ok(DetectedTail {
            tail: tail.reduced(),
            threshold,
            period: m.period,
            numerator_x_degree: m.kn,
            n_degree: m.dg,
            working_order: w_max / d,
        });
    }
    Err(Error::NotStable(trace.join("; ")))
}

/// Smallest `n` such that for all sampled `n' ≥ n` and `k ≤ x_order` the
/// partial-sum defect `f_{n'} - Σ_{j≤k} Φ_j q^{jn'}` has valuation above `k n'`
/// (or vanishes to the known precision).
fn defect_threshold(f: &BTreeMap<i64, TruncatedSeries>, tail: &TailSeries, x_order: usize) -> Result<i64> {
    let d = tail.denom();
    let mut threshold = None;
    for (n, fn_) in f.iter().rev() {
        let fn_ = fn_.rescale(fn_.denom().lcm(&d));
        let t = tail.rescale(fn_.denom());
        let ok = (|| -> bool {
            let dd = t.denom();
            let mut r = RSeries::from_series(&fn_, i64::MAX / 4);
            for k in 0..=x_order {
                let row = &t.rows[k];
                let mut terms = BTreeMap::new();
                for (e, c) in &row.terms {
                    terms.insert(e + k as i64 * n * dd, c.eval(*n));
                }
                let phi = RSeries::from_map(terms, Some(row.order + k as i64 * n * dd));
                r = r.sub(&phi);
                let bound = k as i64 * n * dd;
                if r.terms.keys().next().is_some_and(|e| *e <= bound) {
                    return false;
                }
            }
            true
        })();
        if !ok {
            break;
        }
        threshold = Some(*n);
    }
    threshold.ok_or_else(|| Error::NotStable("partial-sum defect fails at the largest sample".into()))
}

fn ray_clearing(rs: &RootSystemData, lambda: Weight) -> Result<Vec<ClearingFactor>> {
    rs.positive_roots
        .iter()
        .map(|a| {
            let c = rs.inner(lambda, *a);
            if !c.is_integer() {
                return Err(Error::Tail(format!("fractional x exponent {} in denominator", c)));
            }
            Ok(ClearingFactor { c: c.to_integer(), d: rs.inner(rs.rho, *a) })
        })
        .collect()
}

/// `Ĵ_n = q^{-δ*(n)} J_{K, nλ}` for `0 ≤ n ≤ n_max`, computed in parallel.
pub fn shifted_family(rs: &RootSystemData, knot: TorusKnot, lambda: Weight, n_max: i64) -> Result<Vec<(i64, TruncatedSeries)>> {
    (0..=n_max).into_par_iter().map(|n| shifted_jones(rs, knot, n * lambda).map(|s| (n, s))).collect()
}

/// Detects the `c`-stable tail of `n ↦ Ĵ_{K, nλ}` from `n ≤ n_max`.
pub fn detect_cstability(
    rs: &RootSystemData,
    knot: TorusKnot,
    lambda: Weight,
    n_max: i64,
    x_order: usize,
    q_order: i64,
) -> Result<DetectedTail> {
    let clearing = ray_clearing(rs, lambda)?;
    let samples = shifted_family(rs, knot, lambda, n_max)?;
    detect_tail(&samples, &clearing, x_order, q_order)
}

// ---------------------------------------------------------------------------
// Tail from the stable-limit formula

/// Affine decomposition `μ_{nλ,a} = n ν¹ + ν⁰` on `n ≡ n0 (mod m)`.
pub fn minimizer_decomposition(rs: &RootSystemData, lambda: Weight, a: i64, n0: i64, m: i64) -> Result<(Weight, Weight)> {
    let at = |j: i64| n0 + m * j;
    let mu = |n: i64| minimizer_closed_form(rs, n * lambda, a);
    let (n1, n2) = (at(8), at(9));
    let diff = mu(n2)? - mu(n1)?;
    let nu1 = diff.div_exact(m).ok_or_else(|| Error::Tail("minimizer is not affine on the progression".into()))?;
    let nu0 = mu(n1)? - n1 * nu1;
    for j in 1..12 {
        let n = at(j);
        if mu(n)? != n * nu1 + nu0 {
            return Err(Error::Tail(format!("minimizer is not affine at n={}", n)));
        }
    }
    Ok((nu1, nu0))
}

/// A stable-limit summand: shift, q-exponent, x-exponent, product exponents
/// and its multiplicity as a quasi-polynomial in n.
type FittedTerm = (Weight, Q64, Q64, Vec<Q64>, QuasiPolynomial);

fn weight_l1(w: Weight) -> i64 {
    w.0[0].abs() + w.0[1].abs()
}

/// Evaluates the tail of `Ĵ_{T(a,b), nλ}` on `n ≡ n0 (mod a·|Λ/Λ_r|)` by
/// summing over the tangent cone of the shifted lattice hull, with each
/// multiplicity `n ↦ m^{μ̂+μ_{nλ,a}}_{nλ,a}` fitted by a quasi-polynomial.
pub fn tail_eval_stable_limit(
    rs: &RootSystemData,
    knot: TorusKnot,
    lambda: Weight,
    n0: i64,
    x_order: usize,
    q_order: i64,
) -> Result<TailSeries> {
    if rs.rank() != 2 {
        return Err(Error::UnsupportedAlgebra(rs.algebra.to_string()));
    }
    if !lambda.is_dominant() {
        return Err(Error::NotDominant(lambda.to_string()));
    }
    let a = knot.a;
    let m = a * rs.fundamental_group_order;
    let n0 = n0.rem_euclid(m);
    let (nu1, nu0) = minimizer_decomposition(rs, lambda, a, n0, m)?;
    let clearing = ray_clearing(rs, lambda)?;
    let r = Q64::new(knot.b, a);
    let dd = 2 * a * rs.gram_den();
    let k_max = x_order as i64;
    let qo = Q64::from_integer(q_order);
    let roots = &rs.positive_roots;
    let kx: Vec<Q64> = roots.iter().map(|al| rs.inner(nu1, *al)).collect();
    if kx.iter().any(|k| !k.is_integer()) {
        return Err(Error::Tail("fractional x exponent in a summand factor".into()));
    }
    let kx: Vec<i64> = kx.iter().map(|k| k.to_integer()).collect();
    let free: Vec<bool> = (0..2).map(|i| nu1.0[i] == 0).collect();

    let mut numer: Vec<TailRow> = (0..=x_order).map(|_| TailRow::empty(q_order * dd)).collect();
    let mut quiet = 0;
    let mut radius = 0i64;
    while quiet < 2 || radius < 3 {
        if radius > 400 {
            return Err(Error::Tail("summation did not terminate".into()));
        }
        let mut shell = Vec::new();
        for x in -radius..=radius {
            for y in -radius..=radius {
                if x.abs().max(y.abs()) == radius {
                    shell.push(Weight([x, y]));
                }
            }
        }
        let mut candidates = Vec::new();
        for h in shell {
            let shifted = h + nu0;
            if (0..2).any(|i| free[i] && shifted.0[i] < 0) {
                continue;
            }
            let e = r / 2 * rs.inner(h, h) + (r - 1) * rs.inner(h, rs.rho) + r * rs.inner(h, nu0);
            let xexp = r * rs.inner(h, nu1);
            let eas: Vec<Q64> = roots.iter().map(|al| rs.inner(shifted + rs.rho, *al)).collect();
            let lb = eas.iter().fold(e, |acc, x| acc + (*x).min(Q64::from_integer(0)));
            if xexp > Q64::from_integer(k_max) || lb >= qo {
                continue;
            }
            candidates.push((h, e, xexp, eas));
        }
        if candidates.is_empty() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        let fitted: Vec<Result<Option<FittedTerm>>> = candidates
            .into_par_iter()
            .map(|(h, e, xexp, eas)| {
                let lo = 3 * (weight_l1(h) + weight_l1(nu0)) + 6;
                let j0 = ((lo - n0).max(0) + m - 1) / m;
                let j0 = j0.max(1);
                let mut samples = Vec::new();
                for j in j0..j0 + 8 {
                    let n = n0 + m * j;
                    let mu = h + n * nu1 + nu0;
                    let hull = lattice_hull(rs, n * lambda, a);
                    let t = if mu.is_dominant() && hull.contains(mu) { plethysm_mult_in(rs, n * lambda, a, mu) } else { 0 };
                    samples.push((n, bq(t)));
                }
                if samples.iter().all(|(_, v)| v.is_zero()) {
                    return Ok(None);
                }
                let fit = fit_quasi_polynomial(&samples, 2).map_err(|_| Error::Tail(format!("multiplicity at μ̂={} not quasi-polynomial", h)))?;
                Ok(Some((h, e, xexp, eas, fit.qp)))
            })
            .collect();
        for item in fitted {
            let Some((h, e, xexp, eas, qp)) = item? else { continue };
            if !xexp.is_integer() || xexp < Q64::from_integer(0) {
                return Err(Error::Tail(format!("x exponent {} at μ̂={} with nonzero multiplicity", xexp, h)));
            }
            let x0 = xexp.to_integer();
            for mask in 0u32..(1 << roots.len()) {
                let mut qe = e;
                let mut xe = x0;
                let mut sign = 1i64;
                for (i, ea) in eas.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        qe += *ea;
                        xe += kx[i];
                        sign = -sign;
                    }
                }
                if xe > k_max || qe >= qo {
                    continue;
                }
                let num = qe * dd;
                if !num.is_integer() {
                    return Err(Error::NonIntegralExponent(qe.to_string()));
                }
                let c = if sign > 0 { qp.clone() } else { qp.neg() };
                numer[xe as usize].add_term(num.to_integer(), &c);
            }
        }
        radius += 1;
    }
    let mut tail = TailSeries::new(dd, (n0, m), numer);
    for cf in &clearing {
        tail = tail.fg_transform(cf.c as usize, cf.d)?;
    }
    // Same sign normalization as `shifted_jones`: leading coefficient +1.
    let lead = tail.rows[0].terms.values().next().map(|c| c.eval(n0 + 100 * m));
    if lead.is_some_and(|v| v.is_negative()) {
        tail = tail.neg();
    }
    Ok(tail.truncate(x_order, q_order).reduced())
}

// ---------------------------------------------------------------------------
// Closed-form tails

/// Tail of `Ĵ_{T(2,b), nλ₁}` for `A2`:
/// `(θ_{b,b/2-1}(1+q³x²) + q³θ_{b,b/2+2}x) / ((1-q)(1-qx)(1-q²x))`.
pub fn tail_closed_t2b(b: i64, x_order: usize, q_order: i64) -> Result<TailSeries> {
    if b < 3 || b % 2 == 0 {
        return Err(Error::Invalid(format!("b={} must be odd and greater than 2", b)));
    }
    let t1 = theta(ThetaParams::new(Q64::from_integer(b), Q64::new(b - 2, 2))?, q_order)?;
    let t2 = theta(ThetaParams::new(Q64::from_integer(b), Q64::new(b + 4, 2))?, q_order)?;
    let rows = vec![t1.clone(), t2.shift(3).truncate(q_order), t1.shift(3).truncate(q_order)];
    let mut rows: Vec<TruncatedSeries> = rows.into_iter().take(x_order + 1).collect();
    while rows.len() < x_order + 1 {
        rows.push(TruncatedSeries::from_terms(1, Vec::new(), Some(q_order)));
    }
    let tail = TailSeries::from_const_rows(&rows, q_order)
        .fg_transform(0, Q64::from_integer(1))?
        .fg_transform(1, Q64::from_integer(1))?
        .fg_transform(1, Q64::from_integer(2))?;
    Ok(tail.truncate(x_order, q_order))
}

/// `(A_{b,0}, A_{b,1})` for the tail `(A_{b,0} + n A_{b,1})/((1-xq)²(1-x²q²))`
/// of `Ĵ_{T(4,b), nρ}` for `A2`.
pub fn tail_closed_t4b(b: i64, q_order: i64) -> Result<(TruncatedSeries, TruncatedSeries)> {
    if b <= 4 || b % 2 == 0 {
        return Err(Error::Invalid(format!("b={} must be odd and greater than 4", b)));
    }
    let rs = Algebra::A2.data();
    let bound = ((12 * q_order) as f64 / b as f64).sqrt() as i64 + 2;
    let o = 12 * q_order;
    let mut a0: BTreeMap<i64, BQ> = BTreeMap::new();
    let mut a1: BTreeMap<i64, BQ> = BTreeMap::new();
    for (st, eps) in rs.orbit_table() {
        let [s, t] = st.0;
        for u1 in 0..=bound {
            if (u1 + s).rem_euclid(4) != 0 {
                continue;
            }
            for u2 in 0..=bound {
                if (u1 - u2 - (t - s)).rem_euclid(12) != 0 {
                    continue;
                }
                let e = b * (u1 * u1 + u1 * u2 + u2 * u2) + (3 * b - 12) * (u1 + u2);
                if e >= o {
                    continue;
                }
                let c = if u1 + s >= u2 + t {
                    BQ::one() - BQ::new(BigInt::from(2 * u1 + u2 + 2 * s + t), BigInt::from(12))
                } else {
                    BQ::one() - BQ::new(BigInt::from(u1 + 2 * u2 + s + 2 * t), BigInt::from(12))
                };
                let factors = [12 * (u1 + 1), 12 * (u2 + 1), 12 * (u1 + u2 + 2)];
                for mask in 0..8u32 {
                    let mut x = e;
                    let mut sign = *eps;
                    for (i, f) in factors.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            x += f;
                            sign = -sign;
                        }
                    }
                    if x >= o {
                        continue;
                    }
                    *a0.entry(x).or_insert_with(BQ::zero) += &c * bq(sign);
                    *a1.entry(x).or_insert_with(BQ::zero) += bq(sign);
                }
            }
        }
    }
    let to_series = |m: BTreeMap<i64, BQ>| -> Result<TruncatedSeries> {
        let mut terms = Vec::new();
        for (e, c) in m {
            if !c.is_integer() {
                return Err(Error::Tail(format!("non-integral coefficient {} at q^{}", c, Q64::new(e, 12))));
            }
            terms.push((e, c.to_integer()));
        }
        Ok(TruncatedSeries::from_terms(12, terms, Some(o)).reduced())
    };
    Ok((to_series(a0)?, to_series(a1)?))
}

/// The full `T(4,b)` tail as a [`TailSeries`] with coefficients linear in `n`.
pub fn tail_closed_t4b_series(b: i64, x_order: usize, q_order: i64) -> Result<TailSeries> {
    let (a0, a1) = tail_closed_t4b(b, q_order)?;
    let pad = |s: TruncatedSeries| {
        let mut v = vec![s];
        while v.len() < x_order + 1 {
            v.push(TruncatedSeries::from_terms(1, Vec::new(), Some(q_order)));
        }
        v
    };
    let tail = TailSeries::from_linear_rows(&pad(a0), &pad(a1), q_order)
        .fg_transform(1, Q64::from_integer(1))?
        .fg_transform(1, Q64::from_integer(1))?
        .fg_transform(2, Q64::from_integer(2))?;
    Ok(tail.truncate(x_order, q_order))
}

/// Rank-two lattice sum
/// `Σ_{m∈ℤ²} q^{4b(m₁²+3m₁m₂+3m₂²)+(b-4)(2m₁+3m₂)} (1-q^{4m₁+1})(1-q^{4m₁+12m₂+1})(1-q^{8m₁+12m₂+2})`.
pub fn a1_lattice_form(b: i64, q_order: i64) -> TruncatedSeries {
    let mut acc: BTreeMap<i64, BigInt> = BTreeMap::new();
    let mut quiet = 0;
    let mut radius = 0i64;
    while quiet < 2 {
        let mut any = false;
        for m1 in -radius..=radius {
            for m2 in -radius..=radius {
                if m1.abs().max(m2.abs()) != radius {
                    continue;
                }
                let base = 4 * b * (m1 * m1 + 3 * m1 * m2 + 3 * m2 * m2) + (b - 4) * (2 * m1 + 3 * m2);
                let f = [4 * m1 + 1, 4 * m1 + 12 * m2 + 1, 8 * m1 + 12 * m2 + 2];
                for mask in 0..8u32 {
                    let mut e = base;
                    let mut sign = 1;
                    for (i, x) in f.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            e += x;
                            sign = -sign;
                        }
                    }
                    if e < q_order {
                        any = true;
                        *acc.entry(e).or_insert_with(BigInt::zero) += sign;
                    }
                }
            }
        }
        quiet = if any { 0 } else { quiet + 1 };
        radius += 1;
    }
    TruncatedSeries::from_terms(1, acc, Some(q_order))
}

/// `(q)_∞ (θ_{15,1/2} - ε q³ θ_{15,19/2})`, the theta-difference form at `b = 5`,
/// where `ε` is the value taken for `(-1)^{3/5}`. Only the real root `ε = -1`
/// reproduces the lattice sum.
pub fn a1_theta_form(q_order: i64) -> Result<TruncatedSeries> {
    a1_theta_form_with_sign(q_order, -1)
}

pub fn a1_theta_form_with_sign(q_order: i64, eps: i64) -> Result<TruncatedSeries> {
    let t1 = theta(ThetaParams::new(Q64::from_integer(15), Q64::new(1, 2))?, q_order)?;
    let t2 = theta(ThetaParams::new(Q64::from_integer(15), Q64::new(19, 2))?, q_order)?;
    let inner = t1.sub(&t2.shift(3).scale(&BigInt::from(eps))).truncate(q_order);
    Ok(q_pochhammer(q_order).mul(&inner).truncate(q_order))
}

/// The triple-product form at `b = 5`.
pub fn a1_triple_product_form(q_order: i64) -> Result<TruncatedSeries> {
    let p = |a: i64| pochhammer(Q64::from_integer(a), Q64::from_integer(15), q_order);
    let first = p(7)?.mul(&p(8)?).mul(&p(15)?).truncate(q_order);
    let second = TruncatedSeries::from_coeffs(1, &[1, 0, -1], None).mul(&p(13)?).mul(&p(15)?).mul(&p(17)?).truncate(q_order);
    Ok(q_pochhammer(q_order).mul(&first.sub(&second)).truncate(q_order))
}

/// The `(b, c)` theta parameters entering the closed-form tails for `b ≤ b_max`.
pub fn tail_theta_params(b_max: i64) -> Vec<(Q64, Q64)> {
    let mut out = Vec::new();
    let mut b = 3;
    while b <= b_max {
        out.push((Q64::from_integer(b), Q64::new(b - 2, 2)));
        out.push((Q64::from_integer(b), Q64::new(b + 4, 2)));
        b += 2;
    }
    out.push((Q64::from_integer(15), Q64::new(1, 2)));
    out.push((Q64::from_integer(15), Q64::new(19, 2)));
    out
}

pub fn q64_to_big(x: Q64) -> BQ {
    q64_to_bq(x)
}

pub fn to_f64(x: &BQ) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::qseries::geometric_inverse;

    fn w(a: i64, b: i64) -> Weight {
        Weight([a, b])
    }

    fn series(c: &[i64]) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(0, c, None)
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let pts: Vec<(i64, BQ)> = (3..6).map(|n| (n, bq(2 * n * n - 3 * n + 7))).collect();
        assert_eq!(interpolate(&pts), vec![bq(7), bq(-3), bq(2)]);
    }

    #[test]
    fn quasi_polynomial_canonical_form() {
        let q = QuasiPolynomial::new(vec![vec![bq(1), bq(2)], vec![bq(1), bq(2)], vec![bq(1), bq(2), bq(0)]]);
        assert_eq!(q.period(), 1);
        assert_eq!(q.degree(), 1);
        assert_eq!(q.eval(5), bq(11));
        assert_eq!(q.to_string(), "1 + 2n");
        let z = QuasiPolynomial::new(vec![vec![bq(0)]]);
        assert!(z.is_zero());
    }

    #[test]
    fn fits_periodic_sequence() {
        let s: Vec<(i64, BQ)> = (0..40).map(|n| (n, bq(if n % 3 == 0 { n * n } else { 5 - n }))).collect();
        let f = fit_quasi_polynomial(&s, 2).unwrap();
        assert_eq!(f.qp.period(), 3);
        assert_eq!(f.qp.degree(), 2);
        assert_eq!(f.threshold, 0);
        for (n, v) in &s {
            assert_eq!(f.qp.eval(*n), *v);
        }
    }

    #[test]
    fn fit_reports_threshold() {
        let s: Vec<(i64, BQ)> = (0..30).map(|n| (n, bq(if n < 7 { 100 } else { 3 * n + 1 }))).collect();
        let f = fit_quasi_polynomial(&s, 2).unwrap();
        assert_eq!(f.qp, QuasiPolynomial::polynomial(vec![bq(1), bq(3)]));
        assert_eq!(f.threshold, 7);
    }

    #[test]
    fn fit_rejects_exponential() {
        let s: Vec<(i64, BQ)> = (0..40).map(|n| (n, BQ::from_integer(BigInt::from(2).pow(n as u32)))).collect();
        assert_eq!(fit_quasi_polynomial(&s, 2), Err(Error::NotQuasiPolynomial));
    }

    #[test]
    fn series_solver_inverts_vandermonde() {
        let u0 = series(&[1, -1, 0, 2]);
        let u1 = series(&[0, 3, 1]);
        let nodes = [7i64, 6];
        let mut a = Vec::new();
        let mut b = Vec::new();
        for n in nodes {
            a.push(vec![RSeries::monomial(0, bq(1)), RSeries::monomial(n, bq(1))]);
            let g = u0.add(&u1.shift(n));
            b.push(RSeries::from_series(&g, 40));
        }
        let u = solve_series_system(a, b, 40).unwrap();
        let back = |s: &RSeries| -> Vec<(i64, BQ)> { s.terms.iter().map(|(e, c)| (*e, c.clone())).collect() };
        assert_eq!(back(&u[0]), vec![(0, bq(1)), (1, bq(-1)), (3, bq(2))]);
        assert_eq!(back(&u[1]), vec![(1, bq(3)), (2, bq(1))]);
        assert!(u[0].order.unwrap() >= 20);
    }

    #[test]
    fn fg_of_one_is_geometric_in_x() {
        let f = TailSeries::from_const_rows(&[TruncatedSeries::one(), TruncatedSeries::zero(), TruncatedSeries::zero()], 10);
        let g = f.fg_transform(1, Q64::from_integer(0)).unwrap();
        for k in 0..3 {
            assert_eq!(g.eval(0).unwrap()[k], TruncatedSeries::from_terms(1, vec![(0, BigInt::one())], Some(10)));
        }
        assert_eq!(g.rows()[0], f.rows()[0]);
    }

    proptest! {
        #[test]
        fn fg_round_trip(
            rows in proptest::collection::vec(proptest::collection::vec(-3i64..4, 0..8), 1..4),
            c in 1usize..3,
            d in 0i64..4,
        ) {
            let rows: Vec<TruncatedSeries> = rows.iter().map(|r| series(r)).collect();
            let f = TailSeries::from_const_rows(&rows, 12);
            let g = f.fg_transform(c, Q64::from_integer(d)).unwrap();
            prop_assert_eq!(&g.rows()[0], &f.rows()[0]);
            let back = g.fg_inverse(c, Q64::from_integer(d)).unwrap();
            prop_assert!(back.agrees_with(&f, f.x_order(), 12));
        }
    }

    #[test]
    fn t4b_prefix() {
        let (a0, a1) = tail_closed_t4b(5, 20).unwrap();
        assert_eq!(a0, TruncatedSeries::from_coeffs(0, &[1, -2, 0, 2, -1], Some(20)));
        let expect = [(0, 1), (1, -2), (3, 2), (4, -1), (6, -1), (9, 2), (10, 2), (12, -2), (15, -4), (18, -1), (19, 2)];
        assert_eq!(a1, TruncatedSeries::from_terms(1, expect.iter().map(|(e, c)| (*e, BigInt::from(*c))), Some(20)));
    }

    #[test]
    fn a1_forms_agree_with_lattice_sum() {
        let (_, a1) = tail_closed_t4b(5, 40).unwrap();
        assert_eq!(a1_lattice_form(5, 40), a1);
        assert_eq!(a1_triple_product_form(40).unwrap(), a1);
        assert_eq!(a1_theta_form(40).unwrap(), a1);
        assert_ne!(a1_theta_form_with_sign(40, 1).unwrap(), a1);
    }

    #[test]
    fn trefoil_closed_tail() {
        let t = tail_closed_t2b(3, 2, 20).unwrap();
        let phi0 = &t.eval(0).unwrap()[0];
        let expected = q_pochhammer(21).mul(&geometric_inverse(Q64::from_integer(1), 20).unwrap()).truncate(20);
        assert_eq!(*phi0, expected);
    }

    #[test]
    fn detect_trefoil_tail() {
        let rs = Algebra::A2.data();
        let k = TorusKnot::new(2, 3).unwrap();
        let d = detect_cstability(rs, k, w(1, 0), 24, 2, 15).unwrap();
        let c = tail_closed_t2b(3, 2, 15).unwrap();
        d.tail.compare(&c, 2, 15).unwrap();
        assert_eq!(d.n_degree, 0);
    }

    #[test]
    fn stable_limit_trivial_ray() {
        let rs = Algebra::A2.data();
        let t = tail_eval_stable_limit(rs, TorusKnot::new(2, 3).unwrap(), Weight::ZERO, 0, 1, 10).unwrap();
        let v = t.eval(0).unwrap();
        assert_eq!(v[0], TruncatedSeries::from_terms(1, vec![(0, BigInt::one())], Some(10)));
        assert!(v[1].is_zero());
    }

    #[test]
    fn stable_limit_trefoil() {
        let rs = Algebra::A2.data();
        let t = tail_eval_stable_limit(rs, TorusKnot::new(2, 3).unwrap(), w(1, 0), 0, 2, 15).unwrap();
        let c = tail_closed_t2b(3, 2, 15).unwrap();
        t.compare(&c, 2, 15).unwrap();
    }

    #[test]
    fn stable_coefficients_of_shifted_family() {
        let rs = Algebra::A2.data();
        let fam = shifted_family(rs, TorusKnot::new(2, 3).unwrap(), w(1, 0), 12).unwrap();
        let sc = stable_coefficients(&fam, 4);
        for n in 6..=12 {
            assert_eq!(sc.rows[&n], sc.rows[&12]);
        }
    }
}
