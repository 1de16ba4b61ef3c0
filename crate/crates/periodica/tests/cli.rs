//! The binary end to end: report schema and exit codes.

use std::process::Command;

use serde_json::Value;

fn periodica(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_periodica")).args(args).output().unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

#[test]
fn genus_of_inline_curve() {
    let (code, r) = periodica(&["genus", "y^2 - x^3 + x + 1"]);
    assert_eq!(code, 0);
    assert_eq!(r["schema"], "periodica/1");
    assert_eq!(r["genus"], 1);
}

#[test]
fn riemann_report_has_tau() {
    let (code, r) = periodica(&["riemann", "y^2 - x^3 + x"]);
    assert_eq!(code, 0);
    assert!(r.to_string().contains("tau"));
}

#[test]
fn parse_error_exits_with_two() {
    let (code, r) = periodica(&["genus", "y^2 - x^3 +"]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["class"], "Parse");
}

#[test]
fn missing_second_curve_is_a_usage_error() {
    let (code, _) = periodica(&["hom", "y^2 - x^3 + x"]);
    assert_eq!(code, 2);
}

#[test]
fn automorphisms_of_the_lemniscatic_curve() {
    let (code, r) = periodica(&["aut", "y^2 - x^3 + x"]);
    assert_eq!(code, 0);
    assert_eq!(r["automorphisms"]["group"]["order"], 4);
}
