use std::process::{Command, Output};

use serde_json::Value;
use torus_tails::cli::suite::{golden_series, minimizer_cross_check};
use torus_tails::jones::{quadratic_forms, TorusKnot};
use torus_tails::lie::{Algebra, RootSystemData, Weight};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-tails")).args(args).env_remove("TORUS_TAILS_THREADS").output().unwrap()
}

fn json_of(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn jones_degree_matches_quadratic_form() {
    let v = json_of(&run(&["jones", "--algebra", "A2", "--knot", "2,3", "--lambda", "1,0", "--n", "5"]));
    let rs = Algebra::A2.data();
    let qf = quadratic_forms(rs, TorusKnot::new(2, 3).unwrap(), Weight([5, 0]));
    assert_eq!(v["result"]["jones"]["delta_star"], qf.f_star(Weight([0, 5])).to_string());
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["D"].as_i64().unwrap() >= 1);
    assert_eq!(v["config"]["args"]["command"], "jones");
}

#[test]
fn jones_accepts_ray_expressions() {
    let a = json_of(&run(&["jones", "--algebra", "a2", "--knot", "2,3", "--lambda", "n*l1", "--n", "7"]));
    let b = json_of(&run(&["jones", "--algebra", "A2", "--knot", "2,3", "--lambda", "1,0", "--n", "7"]));
    assert_eq!(a["result"], b["result"]);
    let r = json_of(&run(&["jones", "--algebra", "A2", "--knot", "2,3", "--ray", "rho", "--n", "0..2"]));
    assert_eq!(r["result"].as_array().unwrap().len(), 3);
}

#[test]
fn trivial_color_is_one() {
    let v = json_of(&run(&["jones", "--algebra", "B2", "--knot", "2,3", "--lambda", "1,1", "--n", "0"]));
    let terms = &v["result"]["jones"]["polynomial"]["terms"];
    assert_eq!(terms, &serde_json::json!([[0, "1"]]));
}

#[test]
fn invalid_knot_exits_2() {
    let o = run(&["jones", "--algebra", "A2", "--knot", "2,4", "--lambda", "1,0", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not coprime"));
    let o = run(&["jones", "--algebra", "E8", "--knot", "2,3", "--lambda", "1,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["summation-set", "--algebra", "A2", "--lambda", "1,0", "--a", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn consistency_error_exits_3() {
    // The table minimizer is off for B2 (0,1) at a = 2, so the shifted sum
    // used by detection does not start at q^0.
    let o = run(&["tail", "--algebra", "B2", "--knot", "2,5", "--lambda", "0,1", "--n-max", "8", "--q-order", "5"]);
    assert_eq!(o.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn csv_is_exact() {
    let o = run(&["--csv", "jones", "--algebra", "A2", "--knot", "2,3", "--lambda", "1,0", "--n", "2"]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    let mut lines = s.lines();
    assert!(lines.next().unwrap().starts_with("# torus-tails"));
    assert_eq!(lines.next().unwrap(), "n,exponent_numerator,denom,coefficient");
    assert!(lines.all(|l| l.split(',').count() == 4));
}

#[test]
fn closed_t45_tail_reproduces_reference_a1() {
    let v = json_of(&run(&["tail", "--algebra", "A2", "--knot", "4,5", "--ray", "rho", "--method", "closed", "--q-order", "90"]));
    let a1: torus_tails::qseries::TruncatedSeries = serde_json::from_value(v["result"]["numerator"]["A1"].clone()).unwrap();
    assert!(a1.agrees_to(&golden_series(1), torus_tails::qseries::Q64::from_integer(88)));
    assert_eq!(v["result"]["residue"], serde_json::json!([0, 1]));
    assert!(v["result"]["phi"][0]["series_linear_n"].is_object());
}

#[test]
fn output_is_byte_stable() {
    let args = ["stable-coeffs", "--algebra", "A2", "--knot", "2,3", "--ray", "l1", "--n-max", "10", "--k-max", "6"];
    let a = run(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_torus-tails")).args(args).env("TORUS_TAILS_THREADS", "3").output().unwrap();
    assert!(a.status.success() && b.status.success());
    let (va, vb): (Value, Value) = (serde_json::from_slice(&a.stdout).unwrap(), serde_json::from_slice(&b.stdout).unwrap());
    assert_eq!(va["result"], vb["result"]);
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn bad_thread_variable_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_torus-tails"))
        .args(["kostant", "--algebra", "G2", "--alpha", "3,2"])
        .env("TORUS_TAILS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_subcommand_exists() {
    for sub in [
        "jones", "degree", "tail", "stable-coeffs", "kostant", "plethysm", "summation-set", "missing-points", "minimizer",
        "selftest",
    ] {
        assert!(run(&[sub, "--help"]).status.success(), "{}", sub);
    }
}

#[test]
fn small_commands() {
    let v = json_of(&run(&["kostant", "--algebra", "B2", "--alpha", "2,2"]));
    assert_eq!(v["result"]["dp"], 4);
    assert_eq!(v["result"]["closed"], 4);
    let v = json_of(&run(&["kostant", "--algebra", "A2", "--alpha", "-1,2", "--method", "dp"]));
    assert_eq!(v["result"]["dp"], 0);
    let v = json_of(&run(&["plethysm", "--algebra", "A2", "--lambda", "1,1", "--a", "4", "--mu", "4,4", "--oracle"]));
    assert_eq!(v["result"]["multiplicity"], 1);
    let v = json_of(&run(&["summation-set", "--algebra", "B2", "--lambda", "rho", "--a", "2"]));
    assert_eq!(v["result"]["size"], 7);
    let v = json_of(&run(&["missing-points", "--algebra", "B2", "--lambda", "1,1", "--a", "2", "--bound-n-max", "4"]));
    assert!(v["result"]["missing"].as_array().unwrap().contains(&serde_json::json!([1, 2])));
    let v = json_of(&run(&["minimizer", "--algebra", "A2", "--lambda", "5,2", "--a", "2"]));
    assert_eq!(v["result"]["table"], serde_json::json!([0, 3]));
    assert_eq!(v["result"]["agree"], true);
    let v = json_of(&run(&["minimizer", "--algebra", "G2", "--lambda", "1,0", "--a", "4"]));
    assert_eq!(v["result"]["agree"], false);
    let v = json_of(&run(&["degree", "--algebra", "A2", "--knot", "2,3", "--lambda", "l1", "--n", "0..9"]));
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 10);
    assert!(v["result"]["fit"]["delta_star_quasi_polynomial"].is_string());
}

#[test]
fn tail_methods_agree_on_the_trefoil() {
    let base = ["tail", "--algebra", "A2", "--knot", "2,3", "--lambda", "1,0", "--q-order", "12", "--n-max", "20"];
    let mut out = Vec::new();
    for m in ["detect", "stable-limit", "closed"] {
        let mut a = base.to_vec();
        a.extend(["--method", m]);
        out.push(json_of(&run(&a))["result"]["phi"].clone());
    }
    assert_eq!(out[0], out[1]);
    assert_eq!(out[1], out[2]);
}

#[test]
fn selftest_filter_runs_one_suite() {
    let o = run(&["selftest", "--filter", "kostant"]);
    let v = json_of(&o);
    let names: Vec<&str> = v["result"]["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["kostant-grid", "kostant-sampled"]);
    assert_eq!(v["config"]["global"]["seed"], 0x5eed);
}

#[test]
fn selftest_failure_exits_1_with_witness() {
    let o = run(&["selftest", "--filter", "extremizers"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("\"witness\""));
}

#[test]
fn corrupted_gram_matrix_is_detected() {
    let good = Algebra::A2.data();
    assert!(minimizer_cross_check(good).is_none());
    // Off-diagonal sign flipped, as from a Cartan matrix copied with the wrong convention.
    let bad = RootSystemData::build_with_gram(Algebra::A2, Some(([[2, -1], [-1, 2]], 3)));
    assert!(minimizer_cross_check(&bad).is_some());
}
