use std::process::{Command, Output};

use serde_json::Value;
use spinfock_core::scalars::{fmt_q, parse_q};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinfock")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn code(args: &[&str]) -> Option<i32> {
    run(args).status.code()
}

/// Every string that looks like a rational must be reduced with a positive
/// denominator and reformat to itself.
fn check_rationals(v: &Value) {
    match v {
        Value::String(s) if s.contains('/') && s.split('/').all(|p| p.trim_start_matches('-').chars().all(|c| c.is_ascii_digit())) => {
            let x = parse_q(s).unwrap();
            assert_eq!(&fmt_q(&x), s);
        }
        Value::Array(a) => a.iter().for_each(check_rationals),
        Value::Object(m) => m.values().for_each(check_rationals),
        _ => {}
    }
}

#[test]
fn hurwitz_examples() {
    let v = json(&["hurwitz", "--degree", "1", "--profile", "1", "--cycles", "2", "--genus", "1"]);
    assert_eq!(v["value"], "1/6");
    assert_eq!(v["b"], 1);
    let v = json(&["hurwitz", "--degree", "3", "--profile", "5", "--genus", "0"]);
    assert_eq!(v["value"], "0/1");
    assert_eq!(v["reason"], "profile exceeds degree");
    let v = json(&["hurwitz", "--degree", "2", "--mixed", ""]);
    assert_eq!(v["value"], "1/2");
}

#[test]
fn gw_examples() {
    assert_eq!(json(&["gw", "--degree", "1", "--insertions", "0"])["value"], "1/1");
    assert_eq!(json(&["gw", "--degree", "2", "--insertions", "1"])["value"], "-1/3");
    let a = json(&["gw", "--degree", "3", "--insertions", "1,1", "--route", "single_vev"]);
    let b = json(&["gw", "--degree", "3", "--insertions", "1,1", "--route", "localization"]);
    assert_eq!(a["value"], b["value"]);
    // degree-zero components included on the routes, matching the native flag
    let c = json(&["gw", "--degree", "3", "--insertions", "1,1", "--include-degree-zero"]);
    assert_eq!(a["value"], c["value"]);
}

#[test]
fn equivariant_series() {
    let args = ["gw", "--degree", "1", "--insertions", "0", "--insertions-infinity", "0", "--t", "2", "--z-order", "2"];
    let s = json(&args);
    let terms = s["series"]["terms"].as_object().unwrap();
    assert!(!terms.is_empty());
    check_rationals(&s);
    let mut other = args.to_vec();
    other.extend(["--route", "quadratic_vev"]);
    assert_eq!(json(&other)["series"], s["series"]);
    let g = json(&["gw", "--degree", "0", "--t", "1", "--q-order", "2", "--u-order", "2"]);
    // exp(q/(2u)) = 1 + q/(2u) + q²/(8u²)
    assert_eq!(g["series"]["terms"]["(0,0)"], "1/1");
    assert_eq!(g["series"]["terms"]["(-1,1)"], "1/2");
    assert_eq!(g["series"]["terms"]["(-2,2)"], "1/8");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["gw", "--degree", "1", "--insertions", "0", "--t", "0", "--route", "localization"]), Some(3));
    assert_eq!(code(&["hurwitz", "--profile", "2", "--genus", "0"]), Some(2));
    assert_eq!(code(&["verify", "--suite", "nope"]), Some(2));
    assert_eq!(code(&["gw", "--degree", "1", "--t", "x"]), Some(2));
    assert_eq!(code(&["table", "--degree", "0"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
}

#[test]
fn table_rows() {
    let v = json(&["table", "--degree", "7"]);
    assert_eq!(v["rows"]["1"], serde_json::json!({"1": "1/2"}));
    let want = serde_json::json!({"7":"1/2", "6":"25/4", "5":"81/4", "4":"99/8", "3":"25/4", "2":"211/8", "1":"99/8"});
    assert_eq!(v["rows"]["7"], want);
    let t = std::time::Instant::now();
    let v = json(&["table", "--degree", "15"]);
    assert!(t.elapsed().as_secs() < 60);
    assert_eq!(v["rows"]["15"]["15"], "1/2");
    check_rationals(&v);
}

#[test]
fn verify_suites() {
    for s in ["table1", "dressing", "routes"] {
        let v = json(&["verify", "--suite", s, "--level", "quick"]);
        assert_eq!(v["passed"], true, "{s}");
        assert!(!v["checks"].as_array().unwrap().is_empty());
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["gw", "--degree", "2", "--insertions", "1", "--t", "3/2", "--route", "localization"];
    let a = run(&args).stdout;
    let b = run(&args).stdout;
    assert_eq!(a, b);
    let one = Command::new(env!("CARGO_BIN_EXE_spinfock")).args(args).env("SPINFOCK_THREADS", "1").output().unwrap();
    assert_eq!(one.stdout, a);
    let bad = Command::new(env!("CARGO_BIN_EXE_spinfock")).args(args).env("SPINFOCK_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn out_file() {
    let p = std::env::temp_dir().join(format!("spinfock-{}.json", std::process::id()));
    let o = run(&["table", "--degree", "3", "--out", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["rows"]["3"]["3"], "1/2");
    std::fs::remove_file(p).ok();
}
