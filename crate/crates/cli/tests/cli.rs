use std::process::{Command, Output};

use serde_json::Value;
use zerosum::krull::TransferSummary;
use zerosum::report::InvariantReport;

fn zerosum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zerosum"))
        .args(args)
        .env_remove("ZEROSUM_TIMEOUT")
        .env_remove("ZEROSUM_MAX_BLOCK_LEN")
        .output()
        .expect("failed to run zerosum")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn davenport_of_c4_c4() {
    let out = zerosum(&["davenport", "--group", "4,4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["davenport"], 7);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn lengths_of_an_atom() {
    let out = zerosum(&["lengths", "--group", "4", "--block", "(1)^4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["lengths"], serde_json::json!([1]));
}

#[test]
fn verify_all_on_c2_c4() {
    let out = zerosum(&["verify", "--group", "2,4", "--target", "all"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["all_hold"], true);
    let verdicts = v["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 6);
    assert!(verdicts.iter().all(|x| x["status"] == "holds"));
    let top = verdicts.iter().find(|x| x["target"] == "full-pair-top").unwrap();
    assert_eq!(top["witness"]["lengths"], serde_json::json!([2, 4, 5]));
}

#[test]
fn single_target_and_unknown_target() {
    let out = zerosum(&["verify", "--group", "3,3", "--target", "near-maximal"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdicts"].as_array().unwrap().len(), 1);
    let bad = zerosum(&["verify", "--group", "3,3", "--target", "nope"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn invariants_on_small_groups() {
    let d = json(&zerosum(&["daleth", "--group", "2,4"]));
    assert_eq!((d["daleth"].as_u64(), d["lower_bound"].as_u64()), (Some(4), Some(4)));
    let c = json(&zerosum(&["catenary", "--group", "5"]));
    assert_eq!(c["catenary"], serde_json::json!({"exact": 5}));
    assert_eq!(c["reason"], "bounds_meet");
    let r = json(&zerosum(&["rho", "--group", "2,2,2", "--k", "2"]));
    assert_eq!(r["rho"], 4);
    let e = json(&zerosum(&["catenary-element", "--group", "2,4", "--block", "(1,0)^2 (0,1)^3 (0,3)^3 (1,1) (1,3)"]));
    assert_eq!((e["catenary"].as_u64(), e["factorizations"].as_u64()), (Some(4), Some(3)));
}

#[test]
fn atoms_listing_and_formats() {
    let v = json(&zerosum(&["atoms", "--group", "2,2"]));
    assert_eq!(v["count"], 5);
    let csv = zerosum(&["atoms", "--group", "2,2", "--length", "3", "--format", "csv"]);
    assert_eq!(String::from_utf8_lossy(&csv.stdout), "group,length,atom\nC2xC2,3,\"(0,1)^1 (1,0)^1 (1,1)^1\"\n");
    let table = zerosum(&["davenport", "--group", "3,3", "--format", "table"]);
    let text = String::from_utf8_lossy(&table.stdout);
    assert!(text.starts_with("group"));
    assert!(text.lines().nth(2).unwrap().starts_with("C3xC3  5"));
}

#[test]
fn exit_codes() {
    // usage errors
    assert_eq!(zerosum(&[]).status.code(), Some(1));
    assert_eq!(zerosum(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(zerosum(&["davenport", "--group", "2,x"]).status.code(), Some(1));
    assert_eq!(zerosum(&["daleth", "--group", "4", "--timeout", "0"]).status.code(), Some(1));
    assert_eq!(zerosum(&["--help"]).status.code(), Some(0));
    // domain errors
    assert_eq!(zerosum(&["lengths", "--group", "5", "--block", "(1)^3"]).status.code(), Some(1));
    assert_eq!(zerosum(&["catenary", "--group", "2"]).status.code(), Some(1));
    // resource errors
    let out = zerosum(&["rho", "--group", "3,3,3", "--k", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource"));
    let out = zerosum(&["lengths", "--group", "4", "--block", "(1)^12", "--max-block-len", "8"]);
    assert_eq!(out.status.code(), Some(3));
    let out = zerosum(&["davenport", "--group", "4,4", "--max-group-order", "8"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn env_overrides_caps() {
    let out = Command::new(env!("CARGO_BIN_EXE_zerosum"))
        .args(["lengths", "--group", "4", "--block", "(1)^12"])
        .env("ZEROSUM_MAX_BLOCK_LEN", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_round_trips_and_is_deterministic() {
    let args = ["report", "--groups", "2,4; 3,3 ;2,2,2", "--workers", "2"];
    let a = zerosum(&args);
    let b = zerosum(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let reports: Vec<InvariantReport> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports.len(), 3);
    for (r, line) in reports.iter().zip(text.lines()) {
        assert_eq!(serde_json::to_string(r).unwrap(), line);
        assert!(r.violations().is_empty());
    }
    assert_eq!(reports[0].group, "C2xC4");
    let csv = zerosum(&["report", "--groups", "2,4;3,3", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("C2xC4,5,39,4,4,4,bounds_meet,5,1 2,"));
}

#[test]
fn transfer_check_summary() {
    let args = ["transfer-check", "--models", "12", "--seed", "5"];
    let a = zerosum(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, zerosum(&args).stdout);
    let s: TransferSummary = serde_json::from_slice(&a.stdout).unwrap();
    assert!(s.passed);
    assert_eq!((s.models, s.elements_checked, s.seed), (12, 60, 5));
    let fixed = json(&zerosum(&["transfer-check", "--group", "2,4", "--models", "3"]));
    assert_eq!(fixed["passed"], true);
}
