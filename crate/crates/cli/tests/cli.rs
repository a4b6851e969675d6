//! Exit codes and error output of the binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn demo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/demo")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_doi-audit"))
}

fn run(args: &[&str], a: &Path, b: &Path, fixtures: &Path, out: &Path) -> Output {
    bin()
        .arg(args[0])
        .arg("--snapshot-a")
        .arg(a)
        .arg("--snapshot-b")
        .arg(b)
        .arg("--fixtures")
        .arg(fixtures)
        .arg("--offline")
        .arg("--out")
        .arg(out)
        .args(&args[1..])
        .env_remove("DOI_AUDIT_CACHE")
        .output()
        .unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).expect("json error on stderr");
    serde_json::from_str(line).unwrap()
}

#[test]
fn demo_run_succeeds() {
    let d = demo();
    let out = tempfile::tempdir().unwrap();
    let o = run(&["run"], &d.join("snapshot_2017.txt.gz"), &d.join("snapshot_2021.jsonl"), &d.join("resolver"), out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["candidates"], 53);
    assert!(out.path().join("report/report.md").exists());
    assert!(!out.path().join("error.json").exists());
}

#[test]
fn stage_subcommand_stops_early() {
    let d = demo();
    let out = tempfile::tempdir().unwrap();
    let o = run(&["diff"], &d.join("snapshot_2017.txt.gz"), &d.join("snapshot_2021.jsonl"), &d.join("resolver"), out.path());
    assert!(o.status.success());
    assert!(out.path().join("diff/only_in_a.txt").exists());
    assert!(!out.path().join("evidence.jsonl").exists());
}

#[test]
fn offline_miss_exits_4_naming_the_doi() {
    let d = demo();
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    std::fs::write(&a, "10.1234/defunct-1\n10.1234/not-recorded\n").unwrap();
    let b = dir.path().join("b.txt");
    std::fs::write(&b, "").unwrap();
    let out = dir.path().join("out");
    let o = run(&["run"], &a, &b, &d.join("resolver"), &out);
    assert_eq!(o.status.code(), Some(4));
    let err = error_json(&o);
    assert_eq!(err["error"]["kind"], "stage_failure");
    assert_eq!(err["error"]["stage"], "resolve");
    assert_eq!(err["error"]["doi"], "10.1234/not-recorded");
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(written, err);
}

#[test]
fn missing_snapshot_exits_3() {
    let d = demo();
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run"], &dir.path().join("absent.txt"), &d.join("snapshot_2021.jsonl"), &d.join("resolver"), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["error"]["kind"], "input");
}

#[test]
fn bad_configuration_exits_2() {
    let d = demo();
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["run", "--rate-limit", "0"],
        &d.join("snapshot_2017.txt.gz"),
        &d.join("snapshot_2021.jsonl"),
        &d.join("resolver"),
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["kind"], "config");
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["x", "y"] {
        let o = bin()
            .args(["synth", "--seed", "9", "--size", "300", "--removed", "20", "--added", "5", "--variant-rate", "0.2", "--out"])
            .arg(dir.path().join(name))
            .output()
            .unwrap();
        assert!(o.status.success());
    }
    for f in ["snapshot_a.txt", "snapshot_b.txt", "synth.json"] {
        assert_eq!(std::fs::read(dir.path().join("x").join(f)).unwrap(), std::fs::read(dir.path().join("y").join(f)).unwrap());
    }
}
