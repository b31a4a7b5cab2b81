use std::path::Path;
use std::process::{Command, Output};

use harnack_cli::ReportFile;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harnack-lab")).args(args).output().expect("binary runs")
}

fn without_millis(path: &Path) -> ReportFile {
    let mut file: ReportFile = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    file.reports.iter_mut().for_each(|r| r.millis = 0);
    file
}

#[test]
fn list_shows_ids_and_anchors() {
    let out = lab(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 24);
    assert!(text.lines().next().unwrap().starts_with("CHK-S1"));
    assert!(text.contains("CHK-B8"));
}

#[test]
fn full_suite_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = lab(&["check", "--suite", "all", "--soliton", "all", "--seed", "42", "--points", "32", "--format", "json", "--output", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (fa, fb) = (without_millis(&a), without_millis(&b));
    assert_eq!(fa, fb);
    assert!(fa.reports.iter().any(|r| r.status == harnack_cli::Status::Pass));
    assert!(fa.reports.iter().all(|r| r.status != harnack_cli::Status::Fail));
    let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    for key in ["version", "seed", "config", "reports"] {
        assert!(raw.get(key).is_some(), "{key}");
    }
}

#[test]
fn all_skipped_exits_zero_with_warning() {
    let out = lab(&["check", "--suite", "CHK-L2", "--soliton", "cigar_static"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lab(&["check", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(lab(&["check", "--order", "9"]).status.code(), Some(2));
    assert_eq!(lab(&["check", "--tol", "CHK-S1=1e-3"]).status.code(), Some(2));
    assert_eq!(lab(&["check", "--tol", "CHK-NOPE=1e-9"]).status.code(), Some(2));
    assert_eq!(lab(&["grid", "--suite", "CHK-S1"]).status.code(), Some(2));
    assert_eq!(lab(&["teleport"]).status.code(), Some(2));
}

#[test]
fn csv_has_one_row_per_sample() {
    let out = lab(&["check", "--suite", "CHK-S1", "--soliton", "cigar_static", "--points", "5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("check_id,soliton,point_index,residual"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[4].starts_with("CHK-S1,cigar_static,4,"));
}

#[test]
fn report_merges_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let merged = dir.path().join("m.json");
    let run = |suite: &str, path: &Path| {
        let out = lab(&["check", "--suite", suite, "--soliton", "cigar_flow", "--points", "4", "--format", "json", "--output", path.to_str().unwrap()]);
        assert!(out.status.success());
    };
    run("CHK-S1", &a);
    run("CHK-S2,CHK-S1", &b);
    let out = lab(&["report", a.to_str().unwrap(), b.to_str().unwrap(), "--format", "json", "--output", merged.to_str().unwrap()]);
    assert!(out.status.success());
    let file = without_millis(&merged);
    let ids: Vec<&str> = file.reports.iter().map(|r| r.check_id.as_str()).collect();
    assert_eq!(ids, ["CHK-S1", "CHK-S2"]);
    assert_eq!(lab(&["report", dir.path().join("missing.json").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let out = lab(&["check", "--suite", "CHK-S1", "--soliton", "cigar_static", "--points", "2", "--format", "json", "--output", a.to_str().unwrap()]);
    assert!(out.status.success());
    let mut file: ReportFile = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    file.reports[0].status = harnack_cli::Status::Fail;
    std::fs::write(&a, file.to_json()).unwrap();
    assert_eq!(lab(&["report", a.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn grid_csv_for_one_study() {
    let out = lab(&["grid", "--suite", "CHK-L1", "--resolutions", "16,32,64", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("check_id,N,residual,observed_order"));
    assert_eq!(lines.count(), 3);
    assert_eq!(lab(&["grid", "--resolutions", "16,32"]).status.code(), Some(2));
}
