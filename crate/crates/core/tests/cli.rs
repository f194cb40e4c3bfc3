mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{bundled_path, random_table};
use serde_json::Value;

fn tabmunge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tabmunge"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = tabmunge(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn fit_apply_invert_drift() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    random_table(3, 120, 2, 2, 0.0)
        .write_csv(std::fs::File::create(&train).unwrap())
        .unwrap();
    let record = dir.path().join("record.json");
    let encoded = dir.path().join("encoded.csv");
    ok(&[
        "fit",
        "--train",
        p(&train),
        "--label",
        "y",
        "--scenario",
        "mnmx+onht",
        "--record",
        p(&record),
        "--out",
        p(&encoded),
        "--valid-frac",
        "0",
    ]);

    let applied = dir.path().join("applied.csv");
    ok(&[
        "apply",
        "--record",
        p(&record),
        "--input",
        p(&train),
        "--out",
        p(&applied),
    ]);
    assert_eq!(std::fs::read(&encoded).unwrap(), std::fs::read(&applied).unwrap());

    let inverted = dir.path().join("inverted.csv");
    ok(&[
        "invert",
        "--record",
        p(&record),
        "--input",
        p(&applied),
        "--features",
        "n0,c1",
        "--out",
        p(&inverted),
    ]);
    let text = std::fs::read_to_string(&inverted).unwrap();
    assert_eq!(text.lines().count(), 121);
    assert!(text.lines().next().unwrap().contains("n0"));

    let drift = ok(&["drift", "--record", p(&record), "--input", p(&train)]);
    let report: Value = serde_json::from_slice(&drift.stdout).unwrap();
    assert!(report["features"].as_array().unwrap().len() >= 4);
}

#[test]
fn errors_are_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = tabmunge(&[
        "fit",
        "--train",
        &bundled_path("iris"),
        "--label",
        "nope",
        "--record",
        p(&dir.path().join("r.json")),
        "--out",
        p(&dir.path().join("o.csv")),
    ]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "column_not_found");
}

#[test]
fn bench_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sep.csv");
    ok(&["generate", "--kind", "separable", "--rows", "80", "--out", p(&data)]);
    let (report, csv) = (dir.path().join("report.json"), dir.path().join("rows.csv"));
    ok(&[
        "bench",
        "--data",
        &format!("{},{}", p(&data), bundled_path("iris")),
        "--scenarios",
        "default,qttf",
        "--reps",
        "2",
        "--k",
        "2",
        "--patience",
        "2",
        "--max-trials",
        "4",
        "--report",
        p(&report),
        "--csv",
        p(&csv),
        "--quiet",
    ]);
    let json: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 8);
    assert_eq!(json["protocol"]["k"], 2);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 9);
    assert!(rows.starts_with("dataset,scenario,repetition,seed,tuning_seconds"));
}
