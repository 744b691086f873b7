use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    Command::new(env!("CARGO_BIN_EXE_nilskt")).arg("--fixture-dir").arg(dir).args(args).output().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{:?}: {}\n{}", args, e, String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), v)
}

#[test]
fn validate_exit_codes() {
    let (code, v) = json(&["validate", "torus.alg"]);
    assert_eq!((code, v["valid"].as_bool()), (0, Some(true)));
    let (code, v) = json(&["validate", "nonintegrable.alg"]);
    assert_eq!(code, 2);
    assert_eq!(v["valid"], false);
    assert_eq!(v["reason"]["code"], "IntegrabilityFailure");
}

#[test]
fn obstruct_verdicts() {
    let (code, v) = json(&["obstruct", "ex1_numeric.alg"]);
    assert_eq!(code, 2);
    assert_eq!(v["verdict"], "OBSTRUCTED");
    assert_eq!(v["obstruction"], "-2*i*e13~13");
    assert_eq!(v["scope"], "invariant subcomplex");

    let (code, v) = json(&["obstruct", "ex1_case2.alg"]);
    assert_eq!(code, 2);
    assert!(v["summary"].as_str().unwrap().starts_with("obstructed unless"));

    let (code, v) = json(&["obstruct", "ex2_half.alg"]);
    assert_eq!(code, 0, "{}", v);
}

#[test]
fn skt_on_the_torus() {
    let (code, v) = json(&["skt", "torus.alg"]);
    assert_eq!(code, 0);
    for key in ["skt_defect", "astheno_kahler_defect", "gauduchon_defect"] {
        assert_eq!(v[key], "0", "{}", key);
    }
}

#[test]
fn cohomology_dimension() {
    let (code, v) = json(&["cohomology", "ex1_numeric.alg", "--pq", "2,2"]);
    assert_eq!(code, 0);
    let g = &v["groups"][0];
    assert_eq!(g["dim"], 23);
    assert_eq!(g["dim_harmonic"], 23);
    assert_eq!(g["harmonic_basis"].as_array().unwrap().len(), 23);
}

#[test]
fn output_is_stable_and_sorted() {
    let a = run(&["cohomology", "ex1_numeric.alg", "--pq", "1,1"]);
    let b = run(&["cohomology", "ex1_numeric.alg", "--pq", "1,1"]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "cohomology");
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn pretty_output() {
    let out = run(&["--pretty", "skt", "torus.alg"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("skt ") && l.trim_end().ends_with("true")));
    assert!(serde_json::from_str::<Value>(&text).is_err());
}

#[test]
fn assignment_substitutes() {
    let (_, v) = json(&["skt", "ex2_half.alg"]);
    assert_eq!(v["skt"], false);
    let (_, v) = json(&["--assign", "al34=1", "skt", "ex2_half.alg"]);
    assert_eq!(v["skt"], true);
    assert_eq!(v["skt_defect"], "0");
}

#[test]
fn sweep_csv() {
    let out = run(&["sweep", "ex1_numeric.alg", "--grid", "0,1/8,2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,defect_norm_num,defect_norm_den");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "0,0,1");
}

#[test]
fn errors_are_reported_as_json() {
    let (code, v) = json(&["obstruct", "missing.alg"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["code"], "Io");
    let out = run(&["frobnicate"]);
    assert!(!out.status.success());
}
