use std::path::PathBuf;
use std::process::{Command, Output};

use nbk::cli::{parse_table_csv, parse_table_json, TableRow};
use nbk::modes::SearchOptions;
use nbk::{mode_grid, Execution, GridSpec};

fn nbk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbk"))
        .args(args)
        .env_remove("NBK_TABLE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn default_rows() -> Vec<TableRow> {
    mode_grid(&GridSpec::default(), SearchOptions::default(), Execution::default())
        .unwrap()
        .iter()
        .map(TableRow::from_cell)
        .collect()
}

#[test]
fn default_table_matches_golden_file() {
    let out = nbk(&["table"]);
    assert!(out.status.success());
    let want = std::fs::read_to_string(golden("table_default.txt")).unwrap();
    assert_eq!(stdout(&out), want);
}

#[test]
fn sequential_table_is_identical() {
    let a = nbk(&["table", "--format", "csv"]);
    let b = nbk(&["table", "--format", "csv", "--sequential"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_round_trip() {
    let out = nbk(&["table", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(parse_table_csv(&stdout(&out)).unwrap(), default_rows());
}

#[test]
fn json_round_trip() {
    let out = nbk(&["table", "--format", "json"]);
    assert!(out.status.success());
    assert_eq!(parse_table_json(&stdout(&out)).unwrap(), default_rows());
}

#[test]
fn tie_set_rendering() {
    let text = stdout(&nbk(&["table", "--k", "2..2", "--r", "2..2", "--p", "0.5"]));
    assert!(text.contains("6,7,8"), "{text}");
    let csv = stdout(&nbk(&["table", "--k", "2..2", "--r", "2..2", "--p", "0.5", "--format", "csv"]));
    assert!(csv.lines().nth(1).unwrap().contains("\"6,7,8\""), "{csv}");
}

#[test]
fn mode_example() {
    let out = nbk(&["mode", "--k", "2", "--r", "3", "--p", "0.5"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("modes: 13\n"));
}

#[test]
fn table_row_for_five_three_half() {
    let rows = parse_table_csv(&stdout(&nbk(&["table", "--format", "csv"]))).unwrap();
    let row = rows.iter().find(|r| (r.k, r.r, r.p.as_str()) == (5, 3, "1/2")).unwrap();
    assert_eq!(row.modes, vec![128]);
}

#[test]
fn pmf_formats() {
    let text = stdout(&nbk(&["pmf", "--k", "2", "--r", "2", "--p", "1/2", "--n-max", "6"]));
    assert!(text.contains("6\t5/64\t0.078125"), "{text}");
    let csv = stdout(&nbk(&["pmf", "--k", "2", "--r", "2", "--p", "1/2", "--n-max", "5", "--format", "csv"]));
    assert_eq!(csv, "n,p_n\n4,1/16\n5,1/16\n");
    let json = stdout(&nbk(&["pmf", "--k", "2", "--r", "2", "--p", "1/2", "--n-max", "4", "--format", "json"]));
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["rows"][0]["p_n"], "1/16");
}

#[test]
fn bounds_report_branch_or_reason() {
    let text = stdout(&nbk(&["bounds", "--k", "2", "--r", "2", "--p", "1/2"]));
    assert!(text.contains("upper: 8\n") && text.contains("lower: 7\n"), "{text}");
    let text = stdout(&nbk(&["bounds", "--k", "2", "--r", "2", "--p", "0.9"]));
    assert!(text.contains("lower: n/a ("), "{text}");
}

#[test]
fn invalid_arguments_exit_two() {
    for args in [
        &["mode", "--k", "2", "--r", "2", "--p", "1.5"][..],
        &["mode", "--k", "0", "--r", "2", "--p", "0.5"],
        &["mode", "--k", "2", "--r", "2", "--p", "abc"],
        &["table", "--k", "5..2"],
        &["frobnicate"],
    ] {
        let out = nbk(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn table_cap_env_override() {
    let args = ["pmf", "--k", "2", "--r", "2", "--p", "1/2", "--n-max", "100"];
    assert!(nbk(&args).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_nbk"))
        .args(args)
        .env("NBK_TABLE_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_passes() {
    let out = nbk(&["verify", "--k", "3", "--r", "2", "--p", "7/10", "--n-max", "30"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("mismatches: 0"));
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--k", "2", "--r", "2", "--p", "1/2", "--n", "5000", "--seed", "9"];
    let a = nbk(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, nbk(&args).stdout);
    assert!(stdout(&a).contains("tv_distance: "));
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("nbk-cli-{}.csv", std::process::id()));
    let out = nbk(&["mode", "--k", "3", "--r", "2", "--p", "0.5", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(written.lines().nth(1), Some("3,2,1/2,16,2027/65536,17,exact"));
}
