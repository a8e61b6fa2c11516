//! Binary contract tests: exit codes, output formats, oracle passthrough.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_welltris"))
}

fn write_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Two chained tables whose join is {(x,p,m), (y,q,m)}.
fn chain_tables(dir: &Path) -> (PathBuf, PathBuf) {
    (
        write_file(dir, "t1.csv", "a,b\nx,p\ny,q\n"),
        write_file(dir, "t2.csv", "b,c\np,m\nq,m\n"),
    )
}

fn preprocess(dir: &Path, tables: &[&Path]) -> PathBuf {
    let index = dir.join("join.idx");
    let out = bin()
        .args(["preprocess", "--out"])
        .arg(&index)
        .args(tables)
        .output()
        .unwrap();
    assert!(out.status.success(), "preprocess failed: {}", stderr(&out));
    index
}

#[test]
fn estimate_reports_the_full_field_set() {
    let dir = tempfile::tempdir().unwrap();
    let (t1, t2) = chain_tables(dir.path());
    let index = preprocess(dir.path(), &[&t1, &t2]);

    let out = bin().args(["estimate", "--index"]).arg(&index).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let obj = v.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "boxes_in_E",
            "delta",
            "epsilon",
            "estimate",
            "iterations",
            "k_used",
            "samples_drawn",
            "seed",
            "wall_ms"
        ]
    );
    assert!(v["estimate"].as_u64().unwrap() >= 2, "estimate undershoots the join");
    assert_eq!(v["epsilon"].as_f64().unwrap(), 0.5);
    assert_eq!(v["delta"].as_f64().unwrap(), 0.1);
    assert_eq!(v["seed"].as_u64().unwrap(), 0);
}

#[test]
fn estimate_on_full_tables_counts_the_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = write_file(dir.path(), "t1.csv", "a\nu\nv\n");
    let t2 = write_file(dir.path(), "t2.csv", "b\ns\nt\n");
    let index = preprocess(dir.path(), &[&t1, &t2]);

    let out = bin().args(["estimate", "--index"]).arg(&index).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["estimate"].as_u64().unwrap(), 4);
    assert_eq!(v["iterations"].as_u64().unwrap(), 0);
    assert_eq!(v["k_used"].as_u64().unwrap(), 0);
}

#[test]
fn estimate_with_an_empty_table_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = write_file(dir.path(), "t1.csv", "a,b\n");
    let t2 = write_file(dir.path(), "t2.csv", "b,c\np,m\n");
    let index = preprocess(dir.path(), &[&t1, &t2]);

    let out = bin().args(["estimate", "--index"]).arg(&index).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["estimate"].as_u64().unwrap(), 0);
}

#[test]
fn exact_prints_size_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (t1, t2) = chain_tables(dir.path());

    let out = bin().arg("exact").args([&t1, &t2]).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "2\n");

    let out = bin().args(["exact", "--rows"]).args([&t1, &t2]).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "a,b,c\nx,p,m\ny,q,m\n");
}

#[test]
fn sampled_rows_verify_against_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (t1, t2) = chain_tables(dir.path());
    let index = preprocess(dir.path(), &[&t1, &t2]);

    let out = bin()
        .args(["sample", "--q", "8", "--seed", "5", "--index"])
        .arg(&index)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,b,c"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        assert!(
            row == "x,p,m" || row == "y,q,m",
            "sampled row {row} is not a join row"
        );
    }
}

#[test]
fn sample_q_zero_prints_the_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let (t1, t2) = chain_tables(dir.path());
    let index = preprocess(dir.path(), &[&t1, &t2]);

    let out = bin().args(["sample", "--q", "0", "--index"]).arg(&index).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "a,b,c\n");
}

#[test]
fn sample_on_an_empty_join_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = write_file(dir.path(), "t1.csv", "a,b\nx,p\n");
    let t2 = write_file(dir.path(), "t2.csv", "b,c\nq,m\n");
    let index = preprocess(dir.path(), &[&t1, &t2]);

    let out = bin().args(["sample", "--q", "1", "--index"]).arg(&index).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["preprocess", "--out"])
        .arg(dir.path().join("ix"))
        .arg(dir.path().join("absent.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn ragged_csv_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_file(dir.path(), "bad.csv", "a,b\nx\n");
    let out = bin()
        .args(["preprocess", "--out"])
        .arg(dir.path().join("ix"))
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn malformed_index_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let index = write_file(dir.path(), "ix", "not an index\n");
    let out = bin().args(["estimate", "--index"]).arg(&index).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn exact_guard_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let mut t1 = String::from("a\n");
    let mut t2 = String::from("b\n");
    for i in 0..1100 {
        t1.push_str(&format!("u{i}\n"));
        t2.push_str(&format!("v{i}\n"));
    }
    let t1 = write_file(dir.path(), "t1.csv", &t1);
    let t2 = write_file(dir.path(), "t2.csv", &t2);

    let out = bin().arg("exact").args([&t1, &t2]).output().unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error:"));
}
