mod common;

use std::process::{Command, Output};

use common::fixture;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_topic-annotator"));
    for var in ["ANNOTATOR_ONTOLOGY", "ANNOTATOR_MODEL", "ANNOTATOR_SCHEME", "ANNOTATOR_HISTORY"] {
        c.env_remove(var);
    }
    c
}

fn classify(extra: &[&str]) -> Output {
    bin()
        .arg("classify")
        .arg(fixture("iswc2018.zip"))
        .arg("--ontology")
        .arg(fixture("ontology.json"))
        .arg("--model")
        .arg(fixture("model.txt"))
        .arg("--scheme")
        .arg(fixture("scheme.json"))
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn classify_is_byte_stable() {
    let a = classify(&["--min-chapters", "13"]);
    let b = classify(&["--min-chapters", "13", "--sequential"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["chapterCount"], 29);
    assert_eq!(report["minChapters"], 13);
    let taxonomy = report["taxonomy"].as_array().unwrap();
    assert_eq!(taxonomy[0]["topic"], "computer science");
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = classify(&["-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["books"].as_array().unwrap().len(), 2);
}

#[test]
fn missing_ontology_is_a_resource_error() {
    let out = bin().arg("classify").arg(fixture("iswc2018.zip")).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--ontology"));

    let out = bin().arg("classify").arg(fixture("iswc2018.zip")).args(["--ontology", "/nonexistent.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bad_archive_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.zip");
    std::fs::write(&junk, b"PK\x03\x04 truncated").unwrap();
    let out = bin().arg("classify").arg(&junk).arg("--ontology").arg(fixture("ontology.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_settings_are_usage_errors() {
    let out = classify(&["--min-chapters", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = classify(&["--lev-threshold", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_scores_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    assert!(classify(&["-o", report.to_str().unwrap()]).status.success());
    let out = bin().arg("eval").arg(fixture("gold.json")).arg(&report).arg("--per-paper").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["papers"], 5);
    assert_eq!(v["averaging"], "micro");
    let recall = v["metrics"]["recall"].as_f64().unwrap();
    assert!(recall > 0.5, "recall {recall}");
    assert_eq!(v["perPaper"].as_array().unwrap().len(), 5);

    let out = bin().arg("eval").arg(fixture("gold.json")).arg(&report).arg("--macro").output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["averaging"], "macro");
    assert_eq!(v["metrics"], v["macro"]);
}
