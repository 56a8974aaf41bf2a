//! End-to-end runs of the `magpot` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use magpot::harness::rows_from_csv;
use serde_json::Value;

fn magpot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magpot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("magpot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn delta_reports_the_triple() {
    let o = magpot(&["delta", "--Z", "1", "--format", "json"]);
    assert!(o.status.success());
    let v = &json_lines(&o)[0];
    let d1 = v["delta1"].as_f64().unwrap();
    assert!((d1 / 5.8263041315386042e-15 - 1.0).abs() < 1e-9, "{v}");
    assert!(v["max_rel_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn hydrogenic_lists_the_nine_levels() {
    let o = magpot(&["hydrogenic", "--Z", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 10);
}

#[test]
fn lamb_at_z92() {
    let o = magpot(&["lamb", "--Z", "92", "--format", "json"]);
    assert!(o.status.success());
    let rows = json_lines(&o);
    assert_eq!(rows.len(), 2);
    assert!((rows[0]["computed"].as_f64().unwrap() - 0.1681208972).abs() < 1e-10);
    assert!((rows[1]["computed"].as_f64().unwrap() - 11.5196099879).abs() < 1e-9);
}

#[test]
fn qed_level_and_bad_level() {
    let o = magpot(&["qed", "--Z", "1", "--level", "1,0,0,1"]);
    assert!(o.status.success());
    let o = magpot(&["qed", "--Z", "1", "--level", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn table_out_of_range_is_a_usage_error() {
    assert_eq!(magpot(&["table", "7"]).status.code(), Some(2));
}

#[test]
fn table_writes_comparison_csv() {
    let path = scratch("t2.csv");
    let o = magpot(&["table", "2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows_from_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.pass == Some(true)));
}

#[test]
fn energy_of_a_configuration_file() {
    let path = scratch("he.cfg");
    std::fs::write(&path, "Z 2\n1 0 0 0 0 2.20144\n1 0 0 0 1 1.20162\n").unwrap();
    let o = magpot(&[
        "energy",
        "--config",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let w = json_lines(&o)[0]["w"].as_f64().unwrap();
    assert!((w + 2.90374994).abs() < 1e-4, "{w}");
}

#[test]
fn integral_agrees_with_its_oracle() {
    let o = magpot(&[
        "integral",
        "--Z",
        "2",
        "--orbitals",
        "1,0,0,0,0,1.5;1,0,0,0,0,1.5;2,1,0,0,0,0.8;2,1,0,0,0,0.8",
        "--row",
        "1",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    assert!(json_lines(&o)[0]["rel_diff"].as_f64().unwrap() < 1e-6);
}

/// Criteria 4 and 5 miss the printed last digit, so Tier 1 exits 1 while
/// reporting the rest as passing.
#[test]
fn validate_tier1_exit_code() {
    let o = magpot(&["validate", "--tier1-only"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    for id in [1, 2, 3, 6, 7, 10] {
        assert!(err.contains(&format!("PASS [{id}]")), "{err}");
    }
    assert!(err.contains("FAIL [4]") && err.contains("FAIL [5]"));
}
