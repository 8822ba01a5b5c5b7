use std::process::{Command, Output};

use serde_json::Value;

fn edyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edyn"))
        .args(args)
        .env_remove("EDYN_DEFAULT_FUEL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn odometer_forbid_prints_two_patterns() {
    let o = edyn(&["forbid", "--builtin", "odometer", "--partition", "depth:1", "--radius", "1", "--fuel", "65536"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("{ε↦0, a↦0}") && out.contains("{ε↦1, a↦1}"), "{out}");
    assert!(out.contains("2 forbidden patterns"));
}

#[test]
fn golden_mean_misses_11() {
    let o = edyn(&["empty", "--builtin", "golden_mean", "--cylinder", "11", "--fuel", "1024"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("accepted"));
    let o = edyn(&["empty", "--builtin", "golden_mean", "--cylinder", "10", "--fuel", "1024"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn odometer_periods_one_to_four() {
    let o = edyn(&["periods", "--builtin", "odometer", "--range", "1..4", "--fuel", "65536", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ns: Vec<i64> = v["certificates"].as_array().unwrap().iter().map(|c| c["n"].as_i64().unwrap()).collect();
    assert_eq!(ns, vec![1, 2, 3, 4]);
}

#[test]
fn undersized_fuel_exits_2() {
    let cases: &[&[&str]] = &[
        &["forbid", "--builtin", "odometer"],
        &["cover", "--builtin", "golden_mean", "--level", "2"],
        &["empty", "--builtin", "golden_mean", "--cylinder", "11"],
        &["extend", "--builtin", "odometer"],
        &["algebraic"],
        &["algebraic", "--values", "1/2,1/2,1/2,1/2"],
        &["periods", "--builtin", "odometer"],
        &["weds", "--builtin", "odometer", "--depth", "2"],
        &["pullback", "--builtin", "golden_mean"],
    ];
    for args in cases {
        let o = edyn(&[args, &["--fuel", "0"][..]].concat());
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn spec_errors_exit_1() {
    let dir = std::env::temp_dir().join(format!("edyn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"builtin": "circles", "params": {"A": [2, "x"]}}"#).unwrap();
    let o = edyn(&["periods", "--system", bad.to_str().unwrap(), "--fuel", "16"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("params.A[1]"));
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(code(&edyn(&["periods", "--system", bad.to_str().unwrap(), "--fuel", "16"])), 1);
    assert_eq!(code(&edyn(&["forbid", "--builtin", "nope", "--fuel", "16"])), 1);
    assert_eq!(code(&edyn(&["forbid", "--builtin", "odometer"])), 1);
}

#[test]
fn default_fuel_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_edyn"))
        .args(["empty", "--builtin", "golden_mean", "--cylinder", "11"])
        .env("EDYN_DEFAULT_FUEL", "1024")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn output_is_deterministic() {
    let args = ["extend", "--builtin", "odometer", "--levels", "1", "--fuel", "4096", "--format", "json", "--eval", "0", "--precision", "1"];
    let a = edyn(&args);
    let b = edyn(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["levels"].as_array().unwrap().len(), 2);
    assert!(v["eval"]["radius"].is_string());
}

#[test]
fn rotation_and_weds_tables() {
    let o = edyn(&["forbid", "--builtin", "rotation", "--params", r#"{"theta":"1/4"}"#, "--partition", "arcs:4", "--fuel", "4096"]);
    assert_eq!(code(&o), 0);
    let o = edyn(&["weds", "--builtin", "shift", "--depth", "2", "--fuel", "4096", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pieces"].as_array().unwrap().len(), 4);
}

#[test]
fn harmonic_half_box_is_excluded() {
    let o = edyn(&["algebraic", "--values", "1/2,1/2,1/2,1/2", "--precision", "2", "--fuel", "1024"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains(": excluded"));
    let o = edyn(&["algebraic", "--values", "1/3,1/3,1/3,1/3", "--precision", "4", "--fuel", "1024"]);
    assert!(stdout(&o).contains("not excluded"));
}
