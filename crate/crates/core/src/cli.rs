//! Command-line front end. Every subcommand wraps one library capability and
//! writes a single document embedding the run configuration, the library
//! version and the exponent denominator `D` of the result.

pub mod suite;

use std::io::Write;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::jones::{
    colored_jones, minimizer_bruteforce, minimizer_bruteforce_for, minimizer_closed_form, normalize_sign,
    quadratic_forms, TorusKnot,
};
use crate::kostant::{kostant_closed, kostant_dp};
use crate::lie::{Algebra, Weight};
use crate::mult::{
    lattice_hull, missing_point_bound_check, missing_points, plethysm_mult, plethysm_mult_adams_oracle,
    summation_set, PlethysmQuery,
};
use crate::qseries::{TruncatedSeries, Q64};
use crate::stability::{
    degree_quasipoly_fit, detect_cstability, stable_coefficients, tail_closed_t2b, tail_closed_t4b,
    tail_closed_t4b_series, tail_eval_stable_limit, StableRow, TailSeries,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "TORUS_TAILS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "torus-tails", version, about = "Colored Jones polynomials of torus knots, their degrees and tails")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub json: bool,
    /// Shorthand for `--format csv`.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub csv: bool,
    /// Worker threads; the TORUS_TAILS_THREADS variable takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for the sampled checks.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,
}

impl GlobalArgs {
    pub fn effective_format(&self) -> Format {
        if self.csv {
            Format::Csv
        } else if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Colored Jones polynomial of a torus knot.
    Jones(ColorArgs),
    /// Minimum and maximum q-degree against the quadratic forms.
    Degree(ColorArgs),
    /// Tail of the family n -> J_{T(a,b), nλ}.
    Tail(TailArgs),
    /// Stable coefficients a_k(n) of the shifted family.
    StableCoeffs(StableArgs),
    /// Kostant partition function.
    Kostant(KostantArgs),
    /// Plethysm multiplicity m^μ_{λ,a}.
    Plethysm(PlethysmArgs),
    /// Summation set S_{λ,a} with multiplicities.
    SummationSet(SetArgs),
    /// Missing points of the lattice hull, with the quadratic bound.
    MissingPoints(MissingArgs),
    /// Closed-form and brute-force minimizer μ_{λ,a}.
    Minimizer(MinimizerArgs),
    /// Runs the oracle and reference suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ColorArgs {
    #[arg(long, value_parser = parse_algebra)]
    pub algebra: Algebra,
    /// Knot as `a,b`.
    #[arg(long, value_parser = parse_knot)]
    #[serde(serialize_with = "ser_knot")]
    pub knot: TorusKnot,
    /// Color direction: `c1,c2`, or an expression such as `n*l1`, `l1+2*l2`, `rho`.
    #[arg(long, value_parser = parse_weight, conflicts_with = "ray")]
    pub lambda: Option<Weight>,
    /// Named ray: `l1`, `l2` or `rho`.
    #[arg(long, value_parser = parse_weight)]
    pub ray: Option<Weight>,
    /// Scale `n`, or an inclusive range `n0..n1`.
    #[arg(long, value_parser = parse_range, default_value = "1")]
    pub n: NRange,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    Detect,
    StableLimit,
    Closed,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TailArgs {
    #[arg(long, value_parser = parse_algebra)]
    pub algebra: Algebra,
    #[arg(long, value_parser = parse_knot)]
    #[serde(serialize_with = "ser_knot")]
    pub knot: TorusKnot,
    #[arg(long, value_parser = parse_weight, conflicts_with = "ray")]
    pub lambda: Option<Weight>,
    #[arg(long, value_parser = parse_weight)]
    pub ray: Option<Weight>,
    #[arg(long, default_value_t = 2)]
    pub x_order: usize,
    #[arg(long, default_value_t = 60)]
    pub q_order: i64,
    #[arg(long, default_value_t = 30)]
    pub n_max: i64,
    #[arg(long, value_enum, default_value_t = TailMethod::Detect)]
    pub method: TailMethod,
    /// Residue class `n0` for the stable-limit evaluation.
    #[arg(long, default_value_t = 0)]
    pub residue: i64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StableArgs {
    #[arg(long, value_parser = parse_algebra)]
    pub algebra: Algebra,
    #[arg(long, value_parser = parse_knot)]
    #[serde(serialize_with = "ser_knot")]
    pub knot: TorusKnot,
    #[arg(long, value_parser = parse_weight, conflicts_with = "ray")]
    pub lambda: Option<Weight>,
    #[arg(long, value_parser = parse_weight)]
    pub ray: Option<Weight>,
    #[arg(long, default_value_t = 30)]
    pub n_max: i64,
    #[arg(long, default_value_t = 20)]
    pub k_max: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KostantMethod {
    Dp,
    Closed,
    Both,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct KostantArgs {
    #[arg(long, value_parser = parse_algebra)]
    pub algebra: Algebra,
    /// Root coordinates `u,v` of `uα₁ + vα₂`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub alpha: [i64; 2],
    #[arg(long, value_enum, default_value_t = KostantMethod::Both)]
    pub method: KostantMethod,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PlethysmArgs {
    #[arg(long, value_parser = parse_algebra)]
    pub algebra: Algebra,
    #[arg(long, value_parser = parse_weight)]
    pub lambda: Weight,
    #[arg(long)]
    pub a: i64,
    #[arg(long, value_parser = parse_weight, allow_hyphen_values = true)]
    pub mu: Weight,
    /// Also evaluate the character-decomposition oracle.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SetArgs {
    #[arg(long, value_parser = parse_algebra)]
    pub algebra: Algebra,
    #[arg(long, value_parser = parse_weight)]
    pub lambda: Weight,
    #[arg(long)]
    pub a: i64,
    /// Keep members whose multiplicity vanishes.
    #[arg(long)]
    pub keep_zero: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MissingArgs {
    #[arg(long, value_parser = parse_algebra)]
    pub algebra: Algebra,
    #[arg(long, value_parser = parse_weight)]
    pub lambda: Weight,
    #[arg(long)]
    pub a: i64,
    /// Also check the quadratic bound along `nλ` for `n ≤` this value.
    #[arg(long)]
    pub bound_n_max: Option<i64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MinimizerArgs {
    #[arg(long, value_parser = parse_algebra)]
    pub algebra: Algebra,
    #[arg(long, value_parser = parse_weight)]
    pub lambda: Weight,
    #[arg(long)]
    pub a: i64,
    /// Knot `a,b` for the brute-force argmin; defaults to `T(a,a+1)` and `T(a,2a+1)`.
    #[arg(long, value_parser = parse_knot)]
    #[serde(serialize_with = "ser_opt_knot")]
    pub knot: Option<TorusKnot>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SelftestArgs {
    /// Run only checks whose name or suite contains this keyword.
    #[arg(long)]
    pub filter: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NRange {
    pub from: i64,
    pub to: i64,
}

fn ser_knot<S: serde::Serializer>(k: &TorusKnot, s: S) -> std::result::Result<S::Ok, S::Error> {
    [k.a, k.b].serialize(s)
}

fn ser_opt_knot<S: serde::Serializer>(k: &Option<TorusKnot>, s: S) -> std::result::Result<S::Ok, S::Error> {
    k.map(|k| [k.a, k.b]).serialize(s)
}

// ---------------------------------------------------------------------------
// Argument parsing

pub fn parse_algebra(s: &str) -> std::result::Result<Algebra, String> {
    Algebra::from_str(s).map_err(|e| e.to_string())
}

pub fn parse_pair(s: &str) -> std::result::Result<[i64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated integers, got {:?}", s));
    }
    let p = |x: &str| x.parse::<i64>().map_err(|e| format!("{:?}: {}", x, e));
    Ok([p(parts[0])?, p(parts[1])?])
}

pub fn parse_knot(s: &str) -> std::result::Result<TorusKnot, String> {
    let [a, b] = parse_pair(s)?;
    TorusKnot::new(a, b).map_err(|e| e.to_string())
}

/// Accepts `c1,c2` or a sum of terms `k*l1`, `l2`, `rho`, each optionally
/// prefixed by `n*` (the scale is supplied separately by `--n`).
pub fn parse_weight(s: &str) -> std::result::Result<Weight, String> {
    let t = s.trim().to_ascii_lowercase();
    if t.contains(',') {
        return parse_pair(&t).map(Weight);
    }
    let mut acc = Weight::ZERO;
    for term in t.split('+') {
        let mut coeff = 1i64;
        let mut base = None;
        for f in term.split('*').map(str::trim) {
            match f {
                "n" => {}
                "l1" | "lambda1" => base = Some(Weight([1, 0])),
                "l2" | "lambda2" => base = Some(Weight([0, 1])),
                "rho" => base = Some(Weight([1, 1])),
                x => coeff *= x.parse::<i64>().map_err(|_| format!("cannot parse weight term {:?}", term))?,
            }
        }
        let b = base.ok_or_else(|| format!("weight term {:?} names no fundamental weight", term))?;
        acc = acc + coeff * b;
    }
    Ok(acc)
}

pub fn parse_range(s: &str) -> std::result::Result<NRange, String> {
    let p = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("{:?}: {}", x, e));
    let r = match s.split_once("..") {
        Some((a, b)) => NRange { from: p(a)?, to: p(b.trim_start_matches('='))? },
        None => {
            let n = p(s)?;
            NRange { from: n, to: n }
        }
    };
    if r.from < 0 || r.to < r.from {
        return Err(format!("invalid range {:?}", s));
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Errors and output

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    pub witness: Option<Value>,
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError { code: 2, message: msg.into(), witness: None }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invalid(_)
            | Error::NotCoprime(..)
            | Error::NotDominant(_)
            | Error::UnsupportedAlgebra(_)
            | Error::AlgebraMismatch(..)
            | Error::OracleSizeLimit(_) => 2,
            _ => 3,
        };
        CliError { code, message: e.to_string(), witness: None }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A command result in all three renderings.
pub struct Output {
    pub denom: i64,
    pub result: Value,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
    pub text: String,
}

fn series_rows(prefix: &[String], s: &TruncatedSeries) -> Vec<Vec<String>> {
    s.terms()
        .iter()
        .map(|(e, c)| {
            let mut r = prefix.to_vec();
            r.extend([e.to_string(), s.denom().to_string(), c.to_string()]);
            r
        })
        .collect()
}

fn series_text(s: &TruncatedSeries) -> String {
    let mut out = String::new();
    for (e, c) in s.iter_q() {
        let sign = if c.sign() == num_bigint::Sign::Minus { " - " } else { " + " };
        let mag = c.magnitude().to_string();
        let mono = if e == Q64::from_integer(0) { mag } else if mag == "1" { format!("q^{}", e) } else { format!("{}q^{}", mag, e) };
        if out.is_empty() {
            out = if sign == " - " { format!("-{}", mono) } else { mono };
        } else {
            out.push_str(sign);
            out.push_str(&mono);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    if let Some(o) = s.order_q() {
        out.push_str(&format!(" + O(q^{})", o));
    }
    out
}

fn color_lambda(lambda: Option<Weight>, ray: Option<Weight>) -> CliResult<Weight> {
    lambda.or(ray).ok_or_else(|| CliError::invalid("one of --lambda or --ray is required"))
}

fn check_rank2_weight(alg: Algebra, l: Weight) -> CliResult<()> {
    alg.data().check_weight(l)?;
    if !l.is_dominant() {
        return Err(Error::NotDominant(l.to_string()).into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_jones(c: &ColorArgs) -> CliResult<Output> {
    let rs = c.algebra.data();
    let l = color_lambda(c.lambda, c.ray)?;
    check_rank2_weight(c.algebra, l)?;
    let ns: Vec<i64> = (c.n.from..=c.n.to).collect();
    let res: Vec<_> = ns.par_iter().map(|n| colored_jones(rs, c.knot, *n * l).map(|j| (*n, j))).collect::<Result<_, _>>()?;
    let denom = res.iter().fold(1i64, |d, (_, j)| num_integer::lcm(d, j.denom()));
    let mut csv_rows = Vec::new();
    let mut text = String::new();
    let mut docs = Vec::new();
    for (n, j) in &res {
        csv_rows.extend(series_rows(&[n.to_string()], &j.polynomial));
        text.push_str(&format!(
            "n={} {} {} λ={}: δ*={} δ={}\n  J = {}\n",
            n, c.algebra, c.knot, j.lambda, j.delta_star, j.delta, series_text(&j.polynomial)
        ));
        docs.push(json!({"n": n, "jones": j}));
    }
    let result = if docs.len() == 1 { docs.pop().unwrap() } else { Value::Array(docs) };
    Ok(Output { denom, result, csv_header: vec!["n", "exponent_numerator", "denom", "coefficient"], csv_rows, text })
}

fn cmd_degree(c: &ColorArgs) -> CliResult<Output> {
    let rs = c.algebra.data();
    let l = color_lambda(c.lambda, c.ray)?;
    check_rank2_weight(c.algebra, l)?;
    let ns: Vec<i64> = (c.n.from..=c.n.to).collect();
    let rows: Vec<Value> = ns
        .par_iter()
        .map(|n| -> CliResult<Value> {
            let nl = *n * l;
            let j = colored_jones(rs, c.knot, nl)?;
            let qf = quadratic_forms(rs, c.knot, nl);
            let table = minimizer_closed_form(rs, nl, c.knot.a).ok();
            let brute = minimizer_bruteforce_for(rs, c.knot, nl).ok();
            let top = c.knot.a * nl;
            Ok(json!({
                "n": n,
                "lambda": nl,
                "delta_star": j.delta_star.to_string(),
                "delta": j.delta.to_string(),
                "minimizer_table": table,
                "f_star_table": table.map(|m| qf.f_star(m).to_string()),
                "minimizer_bruteforce": brute,
                "f_star_bruteforce": brute.map(|m| qf.f_star(m).to_string()),
                "f_top": qf.f(top).to_string(),
                "min_matches_table": table.map(|m| qf.f_star(m) == j.delta_star),
                "max_matches": qf.f(top) == j.delta,
            }))
        })
        .collect::<CliResult<_>>()?;
    let mut fit = Value::Null;
    if ns.len() >= 8 {
        let ds: Vec<(i64, Q64)> = rows
            .iter()
            .map(|r| {
                let n = r["n"].as_i64().unwrap();
                let d: Q64 = r["delta_star"].as_str().unwrap().parse().unwrap();
                (n, d)
            })
            .collect();
        if let Ok(f) = degree_quasipoly_fit(&ds) {
            fit = json!({"delta_star_quasi_polynomial": f.qp.to_string(), "threshold": f.threshold});
        }
    }
    let field = |r: &Value, k: &str| match &r[k] {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        v => v.to_string(),
    };
    let keys = ["n", "delta_star", "f_star_table", "f_star_bruteforce", "delta", "f_top"];
    let csv_rows = rows.iter().map(|r| keys.iter().map(|k| field(r, k)).collect()).collect();
    let text = rows
        .iter()
        .map(|r| {
            format!(
                "n={} δ*={} f*(table)={} f*(brute)={} δ={} f(aλ)={}\n",
                r["n"], field(r, "delta_star"), field(r, "f_star_table"), field(r, "f_star_bruteforce"), field(r, "delta"), field(r, "f_top")
            )
        })
        .collect();
    Ok(Output {
        denom: rs.gram_den(),
        result: json!({"algebra": c.algebra, "knot": [c.knot.a, c.knot.b], "rows": rows, "fit": fit}),
        csv_header: keys.to_vec(),
        csv_rows,
        text,
    })
}

fn tail_output(t: &TailSeries, extra: Value) -> Output {
    let mut csv_rows = Vec::new();
    let mut text = format!("residue n ≡ {} (mod {})\n", t.residue().0, t.residue().1);
    for (k, row) in t.rows().iter().enumerate() {
        for (e, c) in &row.terms {
            csv_rows.push(vec![k.to_string(), e.to_string(), t.denom().to_string(), c.to_string()]);
        }
    }
    text.push_str(&t.to_string());
    text.push('\n');
    let mut result = serde_json::to_value(t).expect("tail serializes");
    if let (Value::Object(m), Value::Object(x)) = (&mut result, extra) {
        m.extend(x);
    }
    Output { denom: t.denom(), result, csv_header: vec!["k", "exponent_numerator", "denom", "coefficient"], csv_rows, text }
}

fn cmd_tail(c: &TailArgs) -> CliResult<Output> {
    if c.q_order <= 0 || c.n_max <= 0 {
        return Err(CliError::invalid("orders must be positive"));
    }
    let rs = c.algebra.data();
    let l = color_lambda(c.lambda, c.ray)?;
    check_rank2_weight(c.algebra, l)?;
    match c.method {
        TailMethod::Detect => {
            let d = detect_cstability(rs, c.knot, l, c.n_max, c.x_order, c.q_order)?;
            Ok(tail_output(
                &d.tail,
                json!({"detection": {"threshold": d.threshold, "period": d.period, "numerator_x_degree": d.numerator_x_degree,
                        "n_degree": d.n_degree, "working_order": d.working_order}}),
            ))
        }
        TailMethod::StableLimit => {
            let t = tail_eval_stable_limit(rs, c.knot, l, c.residue, c.x_order, c.q_order)?;
            Ok(tail_output(&t, json!({})))
        }
        TailMethod::Closed => {
            let (a, b) = (c.knot.a, c.knot.b);
            if c.algebra != Algebra::A2 {
                return Err(CliError::invalid(format!("no closed-form tail for {}", c.algebra)));
            }
            if a == 2 && (l == Weight([1, 0]) || l == Weight([0, 1])) {
                Ok(tail_output(&tail_closed_t2b(b, c.x_order, c.q_order)?, json!({})))
            } else if a == 4 && l == Weight([1, 1]) {
                let (a0, a1) = tail_closed_t4b(b, c.q_order)?;
                let t = tail_closed_t4b_series(b, c.x_order, c.q_order)?;
                let mut out = tail_output(&t, json!({"numerator": {"A0": a0, "A1": a1}}));
                out.text = format!("A0 = {}\nA1 = {}\n{}", series_text(&a0), series_text(&a1), out.text);
                Ok(out)
            } else {
                Err(CliError::invalid(format!("no closed-form tail for {} {} λ={}", c.algebra, c.knot, l)))
            }
        }
    }
}

fn cmd_stable(c: &StableArgs) -> CliResult<Output> {
    let rs = c.algebra.data();
    let l = color_lambda(c.lambda, c.ray)?;
    check_rank2_weight(c.algebra, l)?;
    let js: Vec<_> = (0..=c.n_max).into_par_iter().map(|n| colored_jones(rs, c.knot, n * l)).collect::<Result<_, _>>()?;
    let fam: Vec<(i64, TruncatedSeries)> = js.iter().enumerate().map(|(n, j)| (n as i64, normalize_sign(j.shifted()))).collect();
    let sc = stable_coefficients(&fam, c.k_max);
    let rows: Vec<StableRow> = js
        .iter()
        .enumerate()
        .map(|(n, j)| StableRow {
            n: n as i64,
            delta_star: j.delta_star.to_string(),
            coefficients: sc.rows[&(n as i64)].iter().map(BigInt::to_string).collect(),
        })
        .collect();
    let mut csv_rows = Vec::new();
    let mut text = String::new();
    for r in &rows {
        for (k, a) in r.coefficients.iter().enumerate() {
            csv_rows.push(vec![r.n.to_string(), k.to_string(), a.clone()]);
        }
        text.push_str(&format!("n={:>3} δ*={:>8}: {}\n", r.n, r.delta_star, r.coefficients.join(" ")));
    }
    let denom = js.iter().fold(1i64, |d, j| num_integer::lcm(d, j.denom()));
    Ok(Output { denom, result: json!({"rows": rows}), csv_header: vec!["n", "k", "coefficient"], csv_rows, text })
}

fn cmd_kostant(c: &KostantArgs) -> CliResult<Output> {
    if c.algebra == Algebra::A1 {
        return Err(Error::UnsupportedAlgebra("A1".into()).into());
    }
    let rs = c.algebra.data();
    let dp = matches!(c.method, KostantMethod::Dp | KostantMethod::Both).then(|| kostant_dp(rs, c.alpha));
    let closed = matches!(c.method, KostantMethod::Closed | KostantMethod::Both).then(|| kostant_closed(c.algebra, c.alpha)).flatten();
    if let (Some(x), Some(y)) = (dp, closed) {
        if x != y {
            return Err(CliError {
                code: 3,
                message: format!("closed form {} differs from DP {}", y, x),
                witness: Some(json!({"alpha": c.alpha})),
            });
        }
    }
    let v = dp.or(closed).unwrap_or(0);
    Ok(Output {
        denom: rs.gram_den(),
        result: json!({"alpha": c.alpha, "dp": dp, "closed": closed}),
        csv_header: vec!["u", "v", "p"],
        csv_rows: vec![vec![c.alpha[0].to_string(), c.alpha[1].to_string(), v.to_string()]],
        text: format!("p({}α1 + {}α2) = {}\n", c.alpha[0], c.alpha[1], v),
    })
}

fn cmd_plethysm(c: &PlethysmArgs) -> CliResult<Output> {
    let q = PlethysmQuery { algebra: c.algebra, lambda: c.lambda, a: c.a, mu: c.mu };
    let m = plethysm_mult(&q)?;
    let oracle = if c.oracle { Some(plethysm_mult_adams_oracle(&q)?) } else { None };
    if let Some(o) = oracle {
        if o != m {
            return Err(CliError { code: 3, message: format!("formula {} differs from oracle {}", m, o), witness: Some(json!(q)) });
        }
    }
    Ok(Output {
        denom: c.algebra.data().gram_den(),
        result: json!({"query": q, "multiplicity": m, "oracle": oracle}),
        csv_header: vec!["u1", "u2", "multiplicity"],
        csv_rows: vec![vec![c.mu.0[0].to_string(), c.mu.0[1].to_string(), m.to_string()]],
        text: format!("m^{}_{{{},{}}} = {}\n", c.mu, c.lambda, c.a, m),
    })
}

fn weight_rows(ws: impl IntoIterator<Item = (Weight, Option<i64>)>) -> Vec<Vec<String>> {
    ws.into_iter()
        .map(|(w, m)| {
            let mut r = vec![w.0[0].to_string(), w.0[1].to_string()];
            if let Some(m) = m {
                r.push(m.to_string());
            }
            r
        })
        .collect()
}

fn validate_set_args(alg: Algebra, l: Weight, a: i64) -> CliResult<()> {
    if a < 2 {
        return Err(CliError::invalid(format!("Adams degree a={} must be at least 2", a)));
    }
    check_rank2_weight(alg, l)
}

fn cmd_summation_set(c: &SetArgs) -> CliResult<Output> {
    validate_set_args(c.algebra, c.lambda, c.a)?;
    let s = summation_set(c.algebra.data(), c.lambda, c.a, c.keep_zero)?;
    let members: Vec<Value> = s.iter().map(|(w, m)| json!({"weight": w, "multiplicity": m})).collect();
    let text = s.iter().map(|(w, m)| format!("{} {}\n", w, m)).collect();
    Ok(Output {
        denom: c.algebra.data().gram_den(),
        result: json!({"size": s.len(), "members": members}),
        csv_header: vec!["u1", "u2", "multiplicity"],
        csv_rows: weight_rows(s.iter().map(|(w, m)| (*w, Some(*m)))),
        text,
    })
}

fn cmd_missing(c: &MissingArgs) -> CliResult<Output> {
    validate_set_args(c.algebra, c.lambda, c.a)?;
    let rs = c.algebra.data();
    if rs.rank() != 2 {
        return Err(Error::UnsupportedAlgebra(rs.algebra.to_string()).into());
    }
    let r = missing_points(rs, c.lambda, c.a)?;
    let hull = lattice_hull(rs, c.lambda, c.a);
    let bound = match c.bound_n_max {
        Some(n) => Some(missing_point_bound_check(rs, c.lambda, c.a, 0..=n)?),
        None => None,
    };
    let mut text: String = r.iter().map(|w| format!("{}\n", w)).collect();
    if r.is_empty() {
        text.push_str("no missing points\n");
    }
    Ok(Output {
        denom: rs.gram_den(),
        result: json!({"hull_translates": hull.translates, "missing": r, "bound": bound}),
        csv_header: vec!["u1", "u2"],
        csv_rows: weight_rows(r.iter().map(|w| (*w, None))),
        text,
    })
}

fn cmd_minimizer(c: &MinimizerArgs) -> CliResult<Output> {
    validate_set_args(c.algebra, c.lambda, c.a)?;
    let rs = c.algebra.data();
    let table = minimizer_closed_form(rs, c.lambda, c.a)?;
    let brute = match c.knot {
        Some(k) if k.a != c.a => return Err(CliError::invalid(format!("knot {} does not have a={}", k, c.a))),
        Some(k) => minimizer_bruteforce_for(rs, k, c.lambda),
        None => minimizer_bruteforce(rs, c.lambda, c.a),
    };
    let brute_s = brute.as_ref().map(|w| json!(w)).unwrap_or_else(|e| json!({"error": e.to_string()}));
    let agree = brute.as_ref().map(|b| *b == table).unwrap_or(false);
    Ok(Output {
        denom: rs.gram_den(),
        result: json!({"table": table, "bruteforce": brute_s, "agree": agree}),
        csv_header: vec!["table_u1", "table_u2", "agree"],
        csv_rows: vec![vec![table.0[0].to_string(), table.0[1].to_string(), agree.to_string()]],
        text: format!("table {}  brute force {}  agree {}\n", table, brute_s, agree),
    })
}

/// Runs the suite; returns the rendered report and whether every check passed.
pub fn run_selftest(filter: Option<&str>, seed: u64, log: &mut dyn Write) -> (Vec<suite::CheckResult>, bool) {
    let cfg = suite::SuiteConfig { seed };
    let mut results = Vec::new();
    for c in suite::checks().iter().filter(|c| filter.is_none_or(|f| c.matches(f))) {
        let r = suite::run_check(c, &cfg);
        let _ = writeln!(log, "{:<36} {:>9.2}s", r.label(), r.elapsed.as_secs_f64());
        results.push(r);
    }
    let ok = results.iter().all(|r| r.outcome.passed);
    (results, ok)
}

fn cmd_selftest(c: &SelftestArgs, seed: u64) -> CliResult<(Output, Option<Value>)> {
    let mut err = std::io::stderr();
    let (results, ok) = run_selftest(c.filter.as_deref(), seed, &mut err);
    if results.is_empty() {
        return Err(CliError::invalid(format!("no check matches filter {:?}", c.filter)));
    }
    let text: String = results
        .iter()
        .map(|r| format!("{} {}: {}\n", if r.outcome.passed { "PASS" } else { "FAIL" }, r.label(), r.outcome.summary))
        .collect();
    let csv_rows = results
        .iter()
        .map(|r| vec![r.criterion.map(|c| c.to_string()).unwrap_or_default(), r.name.clone(), r.outcome.passed.to_string()])
        .collect();
    let first = results.iter().find(|r| !r.outcome.passed).map(|r| json!(r));
    let out = Output {
        denom: 1,
        result: json!({"passed": ok, "checks": results}),
        csv_header: vec!["criterion", "name", "passed"],
        csv_rows,
        text,
    };
    Ok((out, first))
}

fn render(out: &Output, cli: &Cli) -> String {
    match cli.global.effective_format() {
        Format::Json => {
            let doc = json!({
                "tool": "torus-tails",
                "version": VERSION,
                "config": {"global": cli.global, "args": cli.command},
                "D": out.denom,
                "result": out.result,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let cfg = serde_json::to_string(&json!({"global": cli.global, "args": cli.command})).expect("json");
            let mut s = format!("# torus-tails {} D={} config={}\n", VERSION, out.denom, cfg);
            w.write_record(&out.csv_header).expect("csv");
            for r in &out.csv_rows {
                w.write_record(r).expect("csv");
            }
            s.push_str(&String::from_utf8(w.into_inner().expect("csv")).expect("utf8"));
            s
        }
        Format::Text => {
            format!("# torus-tails {} D={} seed={}\n{}", VERSION, out.denom, cli.global.seed, out.text)
        }
    }
}

/// Thread count from the environment or the flag.
pub fn thread_count(flag: Option<usize>) -> std::result::Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| CliError::invalid(format!("{}={:?} is not a positive integer", THREADS_ENV, v))),
        Err(_) => Ok(flag),
    }
}

/// Runs the parsed command; returns the rendered document and the exit code.
/// A failing self-test still renders its report but exits with 1, with the
/// first counterexample in the error.
pub fn execute(cli: &Cli) -> CliResult<String> {
    if let Some(n) = thread_count(cli.global.threads)? {
        // A second initialization (tests calling `execute` repeatedly) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = match &cli.command {
        Command::Jones(c) => cmd_jones(c),
        Command::Degree(c) => cmd_degree(c),
        Command::Tail(c) => cmd_tail(c),
        Command::StableCoeffs(c) => cmd_stable(c),
        Command::Kostant(c) => cmd_kostant(c),
        Command::Plethysm(c) => cmd_plethysm(c),
        Command::SummationSet(c) => cmd_summation_set(c),
        Command::MissingPoints(c) => cmd_missing(c),
        Command::Minimizer(c) => cmd_minimizer(c),
        Command::Selftest(c) => {
            let (out, first) = cmd_selftest(c, cli.global.seed)?;
            if let Some(f) = first {
                print!("{}", render(&out, cli));
                return Err(CliError { code: 1, message: "self-test failed".into(), witness: Some(f) });
            }
            Ok(out)
        }
    }?;
    Ok(render(&out, cli))
}

/// Entry point for the binary: parses `args`, runs, prints, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(s) => {
            print!("{}", s);
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            if let Some(w) = &e.witness {
                eprintln!("{}", serde_json::to_string(w).unwrap_or_default());
            }
            e.code
        }
    }
}
