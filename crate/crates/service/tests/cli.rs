use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gavis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gavis"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn corpus(name: &str) -> String {
    let path: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "core",
        "tests",
        "corpus",
        name,
    ]
    .iter()
    .collect();
    path.to_string_lossy().into_owned()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn compile_prints_three_sections() {
    let out = gavis(&["compile", &corpus("point.gas")]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let code = text(&out.stdout);
    let positions: Vec<usize> = [
        "# --- assignments ---",
        "# --- optimization code ---",
        "# --- visualization ---",
    ]
    .iter()
    .map(|h| code.find(h).unwrap_or_else(|| panic!("{h} missing")))
    .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn compile_targets_the_ir() {
    let out = gavis(&["compile", &corpus("sphere.gas"), "--target", "json-ir"]);
    assert_eq!(out.status.code(), Some(0));
    let ir: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(ir["format"], "gavis-ir");
}

#[test]
fn syntax_errors_exit_one_with_positions() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.gas");
    fs::write(&file, "?a = e1;\n?b = a +;\n").unwrap();
    let out = gavis(&["compile", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains(" 2:"), "{}", text(&out.stderr));
}

#[test]
fn run_without_a_binding_reports_missing_input() {
    let out = gavis(&[
        "run",
        &corpus("sphere.gas"),
        "--bind",
        "cx=1",
        "--bind",
        "cy=2",
        "--bind",
        "cz=3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains("MissingInput: r"),
        "{}",
        text(&out.stderr)
    );

    let out = gavis(&[
        "run",
        &corpus("sphere.gas"),
        "--bind",
        "cx=1",
        "--bind",
        "cy=2",
        "--bind",
        "cz=3",
        "--bind",
        "r=2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = result["scene"]["objects"][0]["params"]["r"]
        .as_f64()
        .unwrap();
    assert!((r - 2.0).abs() <= 1e-12, "{r}");
}

#[test]
fn usage_errors_exit_two_with_help() {
    for args in [
        &["frobnicate"][..],
        &["run"],
        &["compile", "x.gas", "--target", "cobol"],
        &["run", "x", "--bind", "r"],
    ] {
        let out = gavis(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(
            text(&out.stderr).contains("Usage: gavis"),
            "{}",
            text(&out.stderr)
        );
    }
    let help = gavis(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    for sub in ["compile", "run", "plan", "serve", "bench"] {
        assert!(text(&help.stdout).contains(sub));
    }
}

#[test]
fn plan_prints_subtasks() {
    let out = gavis(&[
        "plan",
        "Create three spheres S1, S2, S3 with centers at X1 (0, 0, 0), X2 (0, 0.4, 0) and X3 (0, 0.45, 0.2) with radii of 0.5, 0.4 and 0.3, respectively. Calculate the intersection points x4 and x5 of the three balls.",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let plan: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(plan["subtasks"].as_array().unwrap().len() >= 2);
    assert_eq!(gavis(&["plan", "sing a song"]).status.code(), Some(1));
}

#[test]
fn bench_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let dataset: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "core",
        "data",
        "bench.jsonl",
    ]
    .iter()
    .collect();
    let out = gavis(&[
        "bench",
        dataset.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("success rate"));
    let report: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["total"], 40);
    assert!(report["success_rate"].as_f64().unwrap() >= 90.0);
}

#[test]
fn bench_rejects_empty_and_malformed_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    assert_eq!(
        gavis(&["bench", empty.to_str().unwrap()]).status.code(),
        Some(1)
    );
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "\n{\"id\": 1}\n").unwrap();
    let out = gavis(&["bench", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains("line 2"),
        "{}",
        text(&out.stderr)
    );
}
