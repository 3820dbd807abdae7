use std::process::{Command, Output};

fn hf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy-forge")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn classical_weight_example() {
    let o = hf(&["weight", "--h", "x^(2-d)", "--V", "1", "--dim", "3", "--interval", "0:inf", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema"], "hardy-forge/1");
    assert_eq!(v["command"], "weight");
    assert_eq!(v["result"]["classification"], "Optimal");
    for s in v["result"]["samples"].as_array().unwrap() {
        let x = s["x"].as_f64().unwrap();
        let w = s["W"].as_f64().unwrap();
        assert!((w * x * x - 0.25).abs() < 1e-12);
    }
}

#[test]
fn feller_example() {
    let o = hf(&["feller", "--h", "x*(1-x)", "--dim", "1", "--interval", "0:1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["recurrent"], "Yes");
    let t = hf(&["feller", "--h", "x*(1-x)", "--dim", "1", "--interval", "0:1"]);
    assert!(String::from_utf8_lossy(&t.stdout).starts_with("recurrent: Yes"));
}

#[test]
fn json_is_byte_identical_across_runs() {
    let args = ["classify", "--h", "(1+x^2)^((2-d)/2)", "--V", "(1+x^2)^a", "--param", "a=2", "--dim", "3", "--format", "json"];
    let a = hf(&args);
    let b = hf(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stderr.is_empty());
}

#[test]
fn exit_codes() {
    assert_eq!(hf(&["weight", "--nope"]).status.code(), Some(64));
    assert_eq!(hf(&["feller", "--h", "x^k"]).status.code(), Some(64));
    assert_eq!(hf(&["frobnicate"]).status.code(), Some(64));
    let help = hf(&["spectrum", "--help"]);
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for flag in ["--V", "--W", "--trunc", "--interval", "--dim", "--param"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
    // W doubled past the sharp constant fails the spectral check
    let fail = hf(&["spectrum", "--V", "1", "--W", "0.5/x^2", "--dim", "3"]);
    assert_eq!(fail.status.code(), Some(1));
    let pass = hf(&["spectrum", "--h", "x^(2-d)", "--V", "1", "--dim", "3"]);
    assert_eq!(pass.status.code(), Some(0));
}

#[test]
fn bessel_ground_state() {
    let o = hf(&["bessel", "--h", "x^(2-d)", "--V", "1", "--dim", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["result"]["residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["result"]["shooting"]["positive"], true);
}

#[test]
fn catalog_list_and_single_run() {
    let o = hf(&["catalog", "list", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let leray = v["result"].as_array().unwrap().iter().find(|e| e["name"] == "leray").unwrap();
    assert_eq!(leray["params"]["d"].as_f64(), Some(2.0));
    let run = hf(&["catalog", "run", "gegenbauer", "--param", "alpha=0.25"]);
    assert_eq!(run.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("PASS gegenbauer"));
}

#[test]
fn catalog_perturbed_constant_fails() {
    let o = hf(&["catalog", "run", "--all", "--perturb-constant", "ckn:ckn:0.01"]);
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("FAIL ckn"));
    assert_eq!(out.lines().filter(|l| l.starts_with("FAIL")).count(), 1, "{out}");
    let clean = hf(&["catalog", "run", "--all"]);
    assert_eq!(clean.status.code(), Some(0), "{}", String::from_utf8_lossy(&clean.stdout));
}
