//! End-to-end checks of the binary: exit codes, report round-trips, and
//! plot file emission.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poscon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn analyze_succeeds_and_prints_a_summary() {
    let out = run(&["analyze", fixture("ex1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(stdout.contains("finite-horizon set: not polyhedral"), "{stdout}");
    assert!(stdout.contains("k_vert_inf = 2"), "{stdout}");
}

#[test]
fn written_report_reserializes_byte_identically() {
    let dir = scratch("roundtrip");
    let report_path = dir.join("ex0.json");
    let out = run(&[
        "check",
        fixture("ex0.json").to_str().unwrap(),
        "--json",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let original = fs::read_to_string(&report_path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&original).unwrap();
    let round = poscon::report::to_canonical_json(&value);
    assert_eq!(original, round);
    assert_eq!(value["schema"], serde_json::Value::Null); // reports carry tool info instead
    assert_eq!(value["tool"]["name"], "poscon");
    assert_eq!(value["command"], "check");
}

#[test]
fn malformed_json_exits_2_with_parse_location() {
    let dir = scratch("malformed");
    let path = dir.join("bad.json");
    fs::write(&path, "{\n  \"schema\": 1,\n  broken\n}").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("error[Parse]"), "{err}");
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn negative_target_vertex_exits_2() {
    let dir = scratch("negative");
    let path = dir.join("neg.json");
    fs::write(
        &path,
        r#"{"schema": 1, "matrix": [[4.0, 4.0], [11.0, 2.0]], "b": [2.0, 1.0],
           "targets": [{"kind": "cone", "vertices": [[1.0, -1.0]]}]}"#,
    )
    .unwrap();
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("error[NegativeEntry]"), "{}", stderr_of(&out));
}

#[test]
fn missing_file_exits_2() {
    let out = run(&["analyze", "does-not-exist.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("error[Io]"));
}

#[test]
fn reducible_system_exits_2() {
    let dir = scratch("reducible");
    let path = dir.join("red.json");
    fs::write(
        &path,
        r#"{"schema": 1, "matrix": [[1.0, 1.0], [0.0, 1.0]], "b": [1.0, 0.0]}"#,
    )
    .unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_without_targets_exits_2() {
    let out = run(&["check", fixture("ex1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("at least one target"));
}

#[test]
fn plot_writes_svg_and_csv() {
    let dir = scratch("plots");
    for format in ["svg", "csv"] {
        let out = run(&[
            "plot",
            fixture("ex1.json").to_str().unwrap(),
            "--k",
            "3,8,19",
            "--format",
            format,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
        let produced = dir.join(format!("ex1.{format}"));
        assert!(produced.exists());
    }
    let csv = fs::read_to_string(dir.join("ex1.csv")).unwrap();
    assert!(csv.starts_with("k,generator_index,coord_1,coord_2,coord_3,label\n"));
    assert!(csv.lines().any(|l| l.starts_with("-1,0,")), "sentinel rows present");
    let svg = fs::read_to_string(dir.join("ex1.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn svg_of_a_two_state_system_exits_2() {
    let dir = scratch("plots2");
    let out = run(&[
        "plot",
        fixture("ex0.json").to_str().unwrap(),
        "--k",
        "2",
        "--format",
        "svg",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("SvgUnsupportedDim"));
}

#[test]
fn tolerance_flag_overrides_file_options() {
    // An absurdly small k_max keeps the direct search from reaching the
    // vertex number, which the analysis reports as a disagreement.
    let out = run(&[
        "analyze",
        fixture("ex0.json").to_str().unwrap(),
        "--k-max",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("error[Disagreement]"), "{}", stderr_of(&out));
}
