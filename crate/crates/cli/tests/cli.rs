use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn armgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_armgap")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// CSV text with the timestamp column removed.
fn without_timestamp(text: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = header.iter().position(|h| *h == "timestamp").expect("timestamp column");
    std::iter::once(header.join(","))
        .chain(lines.map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f[col] = "";
            f.join(",")
        }))
        .collect()
}

#[test]
fn verify_defaults_pass() {
    let o = armgap(&["verify"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("[pass] prop1_exact"));
}

#[test]
fn mutant_is_reported_with_exit_one() {
    let o = armgap(&["verify", "reimer", "--scale", "0.3", "--inject-mutant", "flip-d-sign"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("[FAIL] prop2_exact"), "{}", stdout(&o));
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(code(&armgap(&["verify", "noise", "--n-max", "40"])), 2);
    assert_eq!(code(&armgap(&["verify", "everything"])), 2);
    assert_eq!(code(&armgap(&["verify", "--inject-mutant", "nonsense"])), 2);
    assert_eq!(code(&armgap(&["no-such-command"])), 2);
    let o = armgap(&["experiment", "theorem3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("theorem1, theorem2, rsw"), "{}", stderr(&o));
    let dir = tempfile::tempdir().unwrap();
    let o = armgap(&["experiment", "rsw", "--pitch", "-1", "--out", path(dir.path())]);
    assert_eq!(code(&o), 2);
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"seeds": 3}"#).unwrap();
    assert_eq!(code(&armgap(&["experiment", "rsw", "--config", path(&cfg)])), 2);
}

#[test]
fn theorem1_writes_store_tables_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 5, "samples": 400, "n_grid": [4, 8, 16]}"#).unwrap();
    let mut texts = vec![];
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = armgap(&["experiment", "theorem1", "--config", path(&cfg), "--seed", "9", "--out", path(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stdout(&o).contains("r_le_one"));
        let table = fs::read_to_string(out.join("theorem1_table.csv")).unwrap();
        let rows: Vec<&str> = table.lines().skip(1).collect();
        assert_eq!(rows.iter().filter(|r| r.starts_with("point,")).count(), 3);
        assert!(rows.iter().any(|r| r.starts_with("fit:r,")));
        texts.push(without_timestamp(&fs::read_to_string(out.join("theorem1.csv")).unwrap()));
        // The flag wins over the file, and the configuration precedes the records.
        let store = fs::read_to_string(out.join("results.jsonl")).unwrap();
        let first: Value = serde_json::from_str(store.lines().next().unwrap()).unwrap();
        assert_eq!(first["config"]["seed"], 9, "{first}");
        assert!(store.lines().count() > 1);
        assert!(out.join("theorem1_summary.txt").exists());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn report_handles_empty_missing_and_filled_stores() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let o = armgap(&["report", path(&empty)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("0 experiment groups"));
    assert_eq!(code(&armgap(&["report", path(&dir.path().join("missing.jsonl"))])), 2);

    let out = dir.path().join("run");
    for seed in ["1", "2"] {
        let o = armgap(&["experiment", "theorem1", "--samples", "300", "--seed", seed, "--out", path(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let o = armgap(&["report", path(&out.join("results.jsonl")), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("theorem1 (seed 1)") && text.contains("theorem1 (seed 2)"), "{text}");
    assert!(text.contains("-0.10416"), "one-arm anchor shown: {text}");
    assert!(out.join("report.csv").exists());
}

#[test]
fn oracle_prints_exact_values() {
    let o = armgap(&["oracle", r#"{"kind":"origin_colour","colour":"white"}"#]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("1/2"));
    let o = armgap(&["oracle", r#"{"kind":"one_arm","colour":"black","n":1}"#, "--lattice-n", "1"]);
    assert!(stdout(&o).starts_with("63/64"), "{}", stdout(&o));
    assert_eq!(code(&armgap(&["oracle", r#"{"kind":"one_arm","colour":"black","n":2}"#])), 2);
    assert_eq!(code(&armgap(&["oracle", "not json"])), 2);
}
