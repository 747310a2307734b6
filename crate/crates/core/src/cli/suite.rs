//! The self-test suite: one check per acceptance criterion plus a few
//! seeded sampled checks. Shared by the `selftest` subcommand and the
//! `acceptance` test target.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::jones::{
    colored_jones, maximizer_bruteforce, minimizer_bruteforce, minimizer_bruteforce_for, minimizer_closed_form,
    quadratic_forms, shifted_jones, TorusKnot,
};
use crate::kostant::{kostant_closed, kostant_dp, kostant_dp_fresh};
use crate::lie::{Algebra, RootSystemData, Weight};
use crate::mult::{
    adams_decomposition, lattice_hull, missing_point_bound_check, missing_points, plethysm_mult_in, summation_set,
};
use crate::qseries::{geometric_inverse, q_pochhammer, theta, ThetaParams, TruncatedSeries, Q64};
use crate::stability::{
    a1_lattice_form, a1_theta_form, a1_triple_product_form, degree_quasipoly_fit, detect_cstability,
    stable_coefficients, tail_closed_t2b, tail_closed_t4b, tail_closed_t4b_series, tail_eval_stable_limit,
    tail_theta_params, TailSeries,
};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0x5eed }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    /// For a failure: whether every failing case lies in the documented
    /// exception pattern of the check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explained: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Outcome {
    fn pass(summary: impl Into<String>) -> Self {
        Outcome { passed: true, summary: summary.into(), explained: None, witness: None }
    }

    fn fail(summary: impl Into<String>, witness: Value) -> Self {
        Outcome { passed: false, summary: summary.into(), explained: Some(false), witness: Some(witness) }
    }

    fn explained_if(mut self, ok: bool) -> Self {
        if !self.passed {
            self.explained = Some(ok);
            self.summary = format!("{} ({})", self.summary, if ok { "all in the known exception set" } else { "some outside the known exception set" });
        }
        self
    }

    fn from_failures(total: usize, what: &str, failures: Vec<Value>) -> Self {
        if failures.is_empty() {
            Outcome::pass(format!("{} {} checked", total, what))
        } else {
            let first = failures[0].clone();
            let shown: Vec<Value> = failures.iter().take(64).cloned().collect();
            Outcome::fail(format!("{} of {} {} fail", failures.len(), total, what), json!({"first": first, "listed": shown}))
        }
    }
}

pub struct Check {
    /// Acceptance criterion number, or `None` for the extra sampled checks.
    pub criterion: Option<usize>,
    pub name: &'static str,
    /// Keyword matched by `selftest --filter`.
    pub suite: &'static str,
    pub run: fn(&SuiteConfig) -> Outcome,
    /// Set when the check is known not to hold; the string says why.
    pub known_failure: Option<&'static str>,
}

impl Check {
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.to_ascii_lowercase();
        self.suite.contains(&f) || self.name.contains(&f) || self.criterion.map(|c| c.to_string()) == Some(f)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub criterion: Option<usize>,
    pub name: String,
    pub suite: String,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub known_failure: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn label(&self) -> String {
        match self.criterion {
            Some(c) => format!("criterion {:>2} {}", c, self.name),
            None => format!("sampled      {}", self.name),
        }
    }

    /// A failure that was not anticipated, or that goes beyond its
    /// documented exception pattern.
    pub fn unexpected(&self) -> bool {
        !self.outcome.passed && (self.known_failure.is_none() || self.outcome.explained != Some(true))
    }
}

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            criterion: Some(1),
            name: "golden-t45-series",
            suite: "tail",
            run: golden_t45,
            known_failure: Some("the reference A0 disagrees with the colored Jones data from q^36 on; A1 matches"),
        },
        Check { criterion: Some(2), name: "three-way-tails", suite: "tail", run: three_way_tails, known_failure: None },
        Check { criterion: Some(3), name: "trefoil-theta-tail", suite: "tail", run: trefoil_theta_tail, known_failure: None },
        Check {
            criterion: Some(4),
            name: "degree-formulas",
            suite: "jones",
            run: degree_formulas,
            known_failure: Some("the closed-form minimizer table is wrong for B2 (0,odd) at a=2 and G2 (1,m2) at a=4,5"),
        },
        Check {
            criterion: Some(5),
            name: "extremizers",
            suite: "jones minimizer",
            run: extremizers,
            known_failure: Some("the closed-form minimizer table is wrong for B2 (0,odd) at a=2 and G2 (1,m2) at a=4,5"),
        },
        Check { criterion: Some(6), name: "kostant-grid", suite: "kostant", run: kostant_grid, known_failure: None },
        Check { criterion: Some(7), name: "plethysm-oracle", suite: "plethysm mult", run: plethysm_oracle, known_failure: None },
        Check { criterion: Some(8), name: "missing-points", suite: "mult missing", run: missing_points_suite, known_failure: None },
        Check {
            criterion: Some(9),
            name: "holonomic-structure",
            suite: "stability",
            run: holonomic_structure,
            known_failure: Some("a_k(n) is linear in n only once n >= k, so the recursion fails for small n"),
        },
        Check { criterion: Some(10), name: "theta-identities", suite: "qseries theta", run: theta_identities, known_failure: None },
        Check { criterion: None, name: "kostant-sampled", suite: "kostant", run: kostant_sampled, known_failure: None },
        Check { criterion: None, name: "plethysm-sampled", suite: "plethysm mult", run: plethysm_sampled, known_failure: None },
    ]
}

pub fn run_check(c: &Check, cfg: &SuiteConfig) -> CheckResult {
    let t = Instant::now();
    let outcome = (c.run)(cfg);
    CheckResult {
        criterion: c.criterion,
        name: c.name.to_string(),
        suite: c.suite.to_string(),
        outcome,
        known_failure: c.known_failure.map(str::to_string),
        elapsed: t.elapsed(),
    }
}

fn w(a: i64, b: i64) -> Weight {
    Weight([a, b])
}

fn knot(a: i64, b: i64) -> TorusKnot {
    TorusKnot::new(a, b).expect("valid knot")
}

fn dominant_upto(total: i64) -> Vec<Weight> {
    let mut v = Vec::new();
    for m1 in 0..=total {
        for m2 in 0..=(total - m1) {
            v.push(w(m1, m2));
        }
    }
    v
}

// ---------------------------------------------------------------------------

/// Reference coefficients of `A₀` and `A₁` for `T(4,5)` through `q^87`.
const GOLDEN_A0: &[(i64, i64)] = &[
    (0, 1), (1, -2), (3, 2), (4, -1), (48, 1), (55, -2), (57, -2), (63, 2), (66, 2), (69, 2), (75, 2), (76, -1),
    (78, -2), (81, -2), (82, -2), (84, -1), (85, -2), (87, 2),
];
const GOLDEN_A1: &[(i64, i64)] = &[
    (0, 1), (1, -2), (3, 2), (4, -1), (6, -1), (9, 2), (10, 2), (12, -2), (15, -4), (18, -1), (19, 2), (21, 2),
    (22, 3), (27, -2), (30, -2), (33, -2), (36, 4), (42, -1), (46, -2), (48, 1), (49, -2), (51, 2), (55, 2),
    (57, 4), (58, -2), (60, 2), (64, -4), (66, -2), (69, -2), (73, -2), (76, -1), (78, 4), (81, 2), (82, 2),
    (84, 1), (85, 2), (87, -2),
];

pub fn golden_series(which: usize) -> TruncatedSeries {
    let g = if which == 0 { GOLDEN_A0 } else { GOLDEN_A1 };
    TruncatedSeries::from_terms(1, g.iter().map(|(e, c)| (*e, BigInt::from(*c))), Some(88))
}

fn prefix_mismatches(name: &str, got: &TruncatedSeries, want: &TruncatedSeries, order: i64) -> Vec<Value> {
    let mut out = Vec::new();
    for (e, _) in got.iter_q() {
        if e < Q64::from_integer(order) && !e.is_integer() {
            out.push(json!({"series": name, "fractional_exponent": e.to_string()}));
        }
    }
    for e in 0..order {
        let (a, b) = (got.coeff_q(Q64::from_integer(e)), want.coeff_q(Q64::from_integer(e)));
        if a != b {
            out.push(json!({"series": name, "exponent": e, "got": a.to_string(), "want": b.to_string()}));
        }
    }
    out
}

fn golden_t45(_: &SuiteConfig) -> Outcome {
    let (a0, a1) = match tail_closed_t4b(5, 90) {
        Ok(x) => x,
        Err(e) => return Outcome::fail("closed form failed", json!(e.to_string())),
    };
    let m0 = prefix_mismatches("A0", &a0, &golden_series(0), 88);
    let m1 = prefix_mismatches("A1", &a1, &golden_series(1), 88);
    if m0.is_empty() && m1.is_empty() {
        return Outcome::pass("A0 and A1 match through q^87");
    }
    let status = |m: &Vec<Value>| if m.is_empty() { "matches".to_string() } else { format!("differs at {} exponents", m.len()) };
    let summary = format!("A0 {}, A1 {} (through q^87)", status(&m0), status(&m1));
    let late = m0.iter().all(|m| m["exponent"].as_i64().is_some_and(|e| e >= 36));
    Outcome::fail(summary, json!({"first": m0.iter().chain(&m1).next(), "A0": m0, "A1": m1})).explained_if(m1.is_empty() && late)
}

fn three_way(rs: &RootSystemData, k: TorusKnot, lambda: Weight, closed: &TailSeries, x_order: usize, q_order: i64) -> Vec<Value> {
    let mut fails = Vec::new();
    let tag = format!("{} {} {}", rs.algebra, k, lambda);
    match detect_cstability(rs, k, lambda, 30, x_order, q_order) {
        Ok(d) => {
            if let Err(e) = d.tail.compare(closed, x_order, q_order) {
                fails.push(json!({"case": tag, "pair": "detect/closed", "mismatch": e}));
            }
            let m = k.a * rs.fundamental_group_order;
            for n0 in 0..m {
                match tail_eval_stable_limit(rs, k, lambda, n0, x_order, q_order) {
                    Ok(s) => {
                        if let Err(e) = s.compare(closed, x_order, q_order) {
                            fails.push(json!({"case": tag, "pair": "stable-limit/closed", "residue": n0, "mismatch": e}));
                        }
                        if let Err(e) = s.compare(&d.tail, x_order, q_order) {
                            fails.push(json!({"case": tag, "pair": "stable-limit/detect", "residue": n0, "mismatch": e}));
                        }
                    }
                    Err(e) => fails.push(json!({"case": tag, "stable_limit_error": e.to_string(), "residue": n0})),
                }
            }
        }
        Err(e) => fails.push(json!({"case": tag, "detect_error": e.to_string()})),
    }
    fails
}

fn three_way_tails(_: &SuiteConfig) -> Outcome {
    let rs = Algebra::A2.data();
    let mut fails = Vec::new();
    match tail_closed_t2b(3, 2, 30) {
        Ok(c) => fails.extend(three_way(rs, knot(2, 3), w(1, 0), &c, 2, 30)),
        Err(e) => fails.push(json!({"closed_error": e.to_string()})),
    }
    match tail_closed_t4b_series(5, 1, 60) {
        Ok(c) => fails.extend(three_way(rs, knot(4, 5), w(1, 1), &c, 1, 60)),
        Err(e) => fails.push(json!({"closed_error": e.to_string()})),
    }
    if fails.is_empty() {
        Outcome::pass("T(2,3) λ1 to x^2 q^30 and T(4,5) ρ to x^1 q^60 agree on every residue class")
    } else {
        Outcome::fail("tails disagree", json!(fails))
    }
}

/// `(q)_∞(1-qx+q³x²)/((1-q)(1-qx)(1-q²x))` expanded directly in `x`.
pub fn trefoil_bivariate(x_order: usize, q_order: i64) -> Vec<TruncatedSeries> {
    let base = q_pochhammer(q_order).mul(&geometric_inverse(Q64::from_integer(1), q_order).expect("positive exponent"));
    let num = [(0usize, 0i64, 1i64), (1, 1, -1), (2, 3, 1)];
    (0..=x_order)
        .map(|k| {
            let mut acc: Vec<(i64, BigInt)> = Vec::new();
            for (j, e, c) in num {
                if j > k {
                    continue;
                }
                // x^{k-j} in 1/((1-qx)(1-q²x)) is Σ_{i=0}^{k-j} q^{i + 2(k-j-i)}.
                let r = (k - j) as i64;
                for i in 0..=r {
                    acc.push((e + i + 2 * (r - i), BigInt::from(c)));
                }
            }
            TruncatedSeries::from_terms(1, acc, None).mul(&base).truncate(q_order)
        })
        .collect()
}

fn trefoil_theta_tail(_: &SuiteConfig) -> Outcome {
    let t = match tail_closed_t2b(3, 2, 50) {
        Ok(t) => t,
        Err(e) => return Outcome::fail("closed form failed", json!(e.to_string())),
    };
    let other = TailSeries::from_const_rows(&trefoil_bivariate(2, 50), 50);
    match t.compare(&other, 2, 50) {
        Ok(()) => Outcome::pass("theta form equals the product form to x^2 q^50"),
        Err(e) => Outcome::fail("mismatch", json!(e)),
    }
}

/// Cases where the closed-form minimizer table disagrees with brute force:
/// B2 with `λ = (0, odd)` at `a = 2`, and G2 with `m₁ = 1` at `a = 4, 5`.
pub fn table_exception(alg: Algebra, l: Weight, a: i64) -> bool {
    match alg {
        Algebra::B2 => a == 2 && l.0[0] == 0 && l.0[1] % 2 == 1,
        Algebra::G2 => (a == 4 || a == 5) && l.0[0] == 1,
        _ => false,
    }
}

const DEGREE_KNOTS: [(i64, i64); 6] = [(2, 3), (2, 5), (3, 4), (3, 5), (4, 5), (5, 6)];

fn degree_case(alg: Algebra, lambda: Weight, k: TorusKnot) -> std::result::Result<(bool, Option<Value>), String> {
    let rs = alg.data();
    let j = colored_jones(rs, k, lambda).map_err(|e| e.to_string())?;
    let qf = quadratic_forms(rs, k, lambda);
    let table = minimizer_closed_form(rs, lambda, k.a).map_err(|e| e.to_string())?;
    let brute = minimizer_bruteforce_for(rs, k, lambda).map_err(|e| e.to_string())?;
    let top = k.a * lambda;
    let brute_ok = j.delta_star == qf.f_star(brute) && j.delta == qf.f(top);
    let ok = brute_ok && table == brute && j.delta_star == qf.f_star(table);
    let wit = (!ok).then(|| {
        json!({
            "algebra": alg, "lambda": lambda, "knot": [k.a, k.b],
            "delta_star": j.delta_star.to_string(), "delta": j.delta.to_string(),
            "table_minimizer": table, "f_star_table": qf.f_star(table).to_string(),
            "bruteforce_minimizer": brute, "f_star_bruteforce": qf.f_star(brute).to_string(),
            "f_top": qf.f(top).to_string(),
        })
    });
    Ok((brute_ok, wit))
}

fn degree_formulas(_: &SuiteConfig) -> Outcome {
    let mut cases = Vec::new();
    for alg in Algebra::RANK2 {
        for l in dominant_upto(5) {
            for (a, b) in DEGREE_KNOTS {
                cases.push((alg, l, knot(a, b)));
            }
        }
    }
    let res: Vec<_> = cases.par_iter().map(|(alg, l, k)| degree_case(*alg, *l, *k)).collect();
    let mut fails = Vec::new();
    let mut brute_fails = 0;
    let mut explained = true;
    for ((alg, l, k), r) in cases.iter().zip(res) {
        match r {
            Ok((brute_ok, wit)) => {
                brute_fails += usize::from(!brute_ok);
                if wit.is_some() && (!brute_ok || !table_exception(*alg, *l, k.a)) {
                    explained = false;
                }
                fails.extend(wit);
            }
            Err(e) => {
                explained = false;
                fails.push(json!({"error": e}));
            }
        }
    }
    let mut o = Outcome::from_failures(cases.len(), "(algebra, λ, knot) cases", fails);
    o.summary = format!("{}; δ* = f*(brute-force argmin) and δ = f(aλ) fail in {} cases", o.summary, brute_fails);
    o.explained_if(explained)
}

fn extremizer_case(alg: Algebra, l: Weight, a: i64) -> Option<Value> {
    let rs = alg.data();
    let max = maximizer_bruteforce(rs, knot(a, a + 1), l);
    let min = minimizer_bruteforce(rs, l, a);
    let table = minimizer_closed_form(rs, l, a);
    let ok = matches!(&max, Ok((mu, 1)) if *mu == a * l)
        && matches!((&min, &table), (Ok(x), Ok(y)) if x == y);
    (!ok).then(|| {
        json!({
            "algebra": alg, "lambda": l, "a": a,
            "argmax": format!("{:?}", max), "argmin": format!("{:?}", min), "table": format!("{:?}", table),
        })
    })
}

fn extremizers(_: &SuiteConfig) -> Outcome {
    let mut cases = Vec::new();
    for alg in Algebra::RANK2 {
        for l in dominant_upto(8) {
            for a in 2..=6 {
                cases.push((alg, l, a));
            }
        }
    }
    let res: Vec<(bool, Option<Value>)> =
        cases.par_iter().map(|(alg, l, a)| (table_exception(*alg, *l, *a), extremizer_case(*alg, *l, *a))).collect();
    let explained = res.iter().all(|(exc, f)| f.is_none() || *exc);
    let fails = res.into_iter().filter_map(|(_, f)| f).collect();
    Outcome::from_failures(cases.len(), "(algebra, λ, a) cases", fails).explained_if(explained)
}

fn kostant_grid(_: &SuiteConfig) -> Outcome {
    let mut fails = Vec::new();
    let mut n = 0;
    for alg in Algebra::RANK2 {
        let rs = alg.data();
        for u in 0..=40 {
            for v in 0..=40 {
                n += 1;
                let (c, d) = (kostant_closed(alg, [u, v]).unwrap_or(0), kostant_dp(rs, [u, v]));
                if c != d {
                    fails.push(json!({"algebra": alg, "alpha": [u, v], "closed": c, "dp": d}));
                }
            }
        }
    }
    Outcome::from_failures(n, "grid points", fails)
}

fn plethysm_case(alg: Algebra, l: Weight, a: i64) -> (usize, Vec<Value>) {
    let rs = alg.data();
    let dec = match adams_decomposition(rs, l, a) {
        Ok(d) => d,
        Err(e) => return (0, vec![json!({"algebra": alg, "lambda": l, "a": a, "error": e.to_string()})]),
    };
    let mut pts: BTreeSet<Weight> = lattice_hull(rs, l, a).points().into_iter().collect();
    pts.extend(dec.keys().copied());
    let mut fails = Vec::new();
    for mu in &pts {
        let (f, o) = (plethysm_mult_in(rs, l, a, *mu), dec.get(mu).copied().unwrap_or(0));
        if f != o {
            fails.push(json!({"algebra": alg, "lambda": l, "a": a, "mu": mu, "formula": f, "oracle": o}));
        }
    }
    (pts.len(), fails)
}

fn plethysm_oracle(_: &SuiteConfig) -> Outcome {
    let mut cases = Vec::new();
    for alg in [Algebra::A2, Algebra::B2] {
        for l in dominant_upto(4) {
            for a in 2..=5 {
                cases.push((alg, l, a));
            }
        }
    }
    let res: Vec<_> = cases.par_iter().map(|(alg, l, a)| plethysm_case(*alg, *l, *a)).collect();
    let total = res.iter().map(|r| r.0).sum();
    Outcome::from_failures(total, "hull points", res.into_iter().flat_map(|r| r.1).collect())
}

fn missing_points_suite(_: &SuiteConfig) -> Outcome {
    let mut fails = Vec::new();
    let b2 = Algebra::B2.data();
    let rho = w(1, 1);
    let want: BTreeSet<Weight> = [w(2, 2), w(0, 4), w(3, 0), w(2, 0), w(0, 2), w(1, 0), w(0, 0)].into_iter().collect();
    match (summation_set(b2, rho, 2, false), missing_points(b2, rho, 2)) {
        (Ok(s), Ok(r)) => {
            let got: BTreeSet<Weight> = s.keys().copied().collect();
            if got != want {
                fails.push(json!({"check": "B2 S_{ρ,2}", "got": got, "want": want}));
            }
            if !r.contains(&w(1, 2)) {
                fails.push(json!({"check": "B2 R_{ρ,2} contains (1,2)", "got": r}));
            }
        }
        (a, b) => fails.push(json!({"check": "B2 ρ a=2", "error": format!("{:?} {:?}", a.err(), b.err())})),
    }
    let a2 = Algebra::A2.data();
    for n in 0..=20 {
        match missing_points(a2, n * w(1, 0), 2) {
            Ok(r) if r.is_empty() => {}
            other => fails.push(json!({"check": "A2 λ1-ray a=2", "n": n, "got": format!("{:?}", other)})),
        }
    }
    let mut spots = Vec::new();
    for alg in Algebra::RANK2 {
        for l in [w(1, 0), w(0, 1), w(1, 1)] {
            for a in 2..=3 {
                spots.push((alg, l, a));
            }
        }
    }
    let reports: Vec<_> = spots
        .par_iter()
        .map(|(alg, l, a)| (*alg, *l, *a, missing_point_bound_check(alg.data(), *l, *a, 0..=12)))
        .collect();
    let mut nonempty = 0;
    for (alg, l, a, r) in reports {
        match r {
            Ok(rep) => nonempty += rep.rows.iter().filter(|x| x.missing > 0).count(),
            Err(e) => fails.push(json!({"check": "bound", "algebra": alg, "lambda": l, "a": a, "error": e.to_string()})),
        }
    }
    if fails.is_empty() {
        Outcome::pass(format!(
            "B2 example reproduced, A2 λ1-ray has no missing points for n<=20, bound holds on {} spot checks ({} with missing points)",
            spots.len() * 13,
            nonempty
        ))
    } else {
        Outcome::fail(format!("{} failures", fails.len()), json!(fails))
    }
}

fn holonomic_structure(_: &SuiteConfig) -> Outcome {
    let rs = Algebra::A2.data();
    let mut fails = Vec::new();
    let mut explained = true;
    for (k, l) in [(knot(2, 3), w(1, 0)), (knot(4, 5), w(1, 1))] {
        let deltas: std::result::Result<Vec<(i64, Q64)>, _> =
            (0..=30).into_par_iter().map(|n| colored_jones(rs, k, n * l).map(|j| (n, j.delta_star))).collect();
        let deltas = match deltas {
            Ok(d) => d,
            Err(e) => {
                fails.push(json!({"family": k.to_string(), "error": e.to_string()}));
                continue;
            }
        };
        match degree_quasipoly_fit(&deltas[..=24]) {
            Ok(fit) => {
                if fit.qp.degree() != 2 {
                    fails.push(json!({"family": k.to_string(), "fitted_degree": fit.qp.degree()}));
                }
                for (n, d) in &deltas[25..] {
                    if fit.qp.eval(*n) != BigRational::new(BigInt::from(*d.numer()), BigInt::from(*d.denom())) {
                        fails.push(json!({"family": k.to_string(), "holdout_n": n, "delta_star": d.to_string()}));
                    }
                }
            }
            Err(e) => fails.push(json!({"family": k.to_string(), "fit_error": e.to_string()})),
        }
    }
    let fam: std::result::Result<Vec<(i64, TruncatedSeries)>, _> =
        (0..=30).into_par_iter().map(|n| shifted_jones(rs, knot(4, 5), n * w(1, 1)).map(|s| (n, s))).collect();
    match fam {
        Ok(fam) => {
            let sc = stable_coefficients(&fam, 20);
            let bad = sc.second_differences(3..=28);
            if !bad.is_empty() {
                explained &= bad.iter().all(|(n, k, _)| *n < *k as i64);
                let (n, k, d) = &bad[0];
                let from = bad.iter().map(|x| x.0 + 1).max().unwrap_or(3);
                fails.push(json!({
                    "recursion": "a_k(n+2) - 2a_k(n+1) + a_k(n)",
                    "nonzero_count": bad.len(),
                    "first": {"n": n, "k": k, "value": d.to_string()},
                    "holds_for_all_k_from_n": from,
                }));
            }
        }
        Err(e) => fails.push(json!({"family": "T(4,5)", "error": e.to_string()})),
    }
    if fails.is_empty() {
        Outcome::pass("δ* quadratic with holdout on both families; recursion holds for k<=20, 3<=n<=28")
    } else {
        let only_recursion = fails.len() == 1 && fails[0].get("recursion").is_some();
        let summary = if only_recursion {
            format!(
                "δ* fits pass on holdout; second difference nonzero at {} (n,k) pairs, first at n={} k={}",
                fails[0]["nonzero_count"], fails[0]["first"]["n"], fails[0]["first"]["k"]
            )
        } else {
            format!("{} failures", fails.len())
        };
        Outcome::fail(summary, json!(fails)).explained_if(explained && only_recursion)
    }
}

fn theta_identities(_: &SuiteConfig) -> Outcome {
    let order = 50;
    let mut fails = Vec::new();
    for (b, c) in tail_theta_params(15) {
        let th = |c: Q64| ThetaParams::new(b, c).and_then(|p| theta(p, order + 40));
        let (t, t_shift, t_neg) = match (th(c), th(b + c), th(-c)) {
            (Ok(x), Ok(y), Ok(z)) => (x, y, z),
            _ => {
                fails.push(json!({"b": b.to_string(), "c": c.to_string(), "error": "theta parameters rejected"}));
                continue;
            }
        };
        let s = b / 2 + c;
        let rhs = t_shift.shift(s.to_integer()).neg();
        if !s.is_integer() || !t.agrees_to(&rhs, Q64::from_integer(order)) {
            fails.push(json!({"identity": "shift", "b": b.to_string(), "c": c.to_string()}));
        }
        if !t.agrees_to(&t_neg, Q64::from_integer(order)) {
            fails.push(json!({"identity": "negation", "b": b.to_string(), "c": c.to_string()}));
        }
    }
    let forms = [
        ("lattice", Ok(a1_lattice_form(5, 60))),
        ("theta-difference", a1_theta_form(60)),
        ("triple-product", a1_triple_product_form(60)),
    ];
    for i in 0..3 {
        for j in (i + 1)..3 {
            match (&forms[i].1, &forms[j].1) {
                (Ok(x), Ok(y)) if x.agrees_to(y, Q64::from_integer(60)) => {}
                _ => fails.push(json!({"forms": [forms[i].0, forms[j].0]})),
            }
        }
    }
    if fails.is_empty() {
        Outcome::pass("theta identities to q^50 and the three A1 forms agree to q^60")
    } else {
        Outcome::fail(format!("{} failures", fails.len()), json!(fails))
    }
}

fn kostant_sampled(cfg: &SuiteConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fails = Vec::new();
    for _ in 0..60 {
        let alg = Algebra::RANK2[rng.gen_range(0..3)];
        let alpha = [rng.gen_range(0..=150), rng.gen_range(0..=150)];
        let (c, d) = (kostant_closed(alg, alpha).unwrap_or(0), kostant_dp_fresh(alg.data(), alpha));
        if c != d {
            fails.push(json!({"algebra": alg, "alpha": alpha, "closed": c, "dp": d}));
        }
    }
    Outcome::from_failures(60, "sampled points", fails)
}

fn plethysm_sampled(cfg: &SuiteConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
    let mut fails = Vec::new();
    for _ in 0..6 {
        let alg = Algebra::RANK2[rng.gen_range(0..3)];
        let l = w(rng.gen_range(0..=3), rng.gen_range(0..=3));
        let a = rng.gen_range(2..=4);
        let (_, f) = plethysm_case(alg, l, a);
        fails.extend(f);
    }
    Outcome::from_failures(6, "sampled (algebra, λ, a) cases", fails)
}

/// Cross-checks the closed-form minimizer table against brute force on a
/// small grid for the given root data, returning the first disagreement.
/// Used to confirm that a corrupted Gram matrix is detected.
pub fn minimizer_cross_check(rs: &RootSystemData) -> Option<Value> {
    for l in dominant_upto(3) {
        for a in 2..=3 {
            let k = knot(a, a + 1);
            let table = minimizer_closed_form(rs, l, a).ok();
            let brute = minimizer_bruteforce_for(rs, k, l).ok();
            if table != brute || table.is_none() {
                return Some(json!({"algebra": rs.algebra, "lambda": l, "a": a, "table": table, "bruteforce": brute}));
            }
        }
    }
    None
}
