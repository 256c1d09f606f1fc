//! The `gstlab` binary: verbs, exit codes and refusal of bad configs.

use std::process::Command;

fn gstlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gstlab")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

#[test]
fn list_names_every_scenario() {
    let out = gstlab(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for e in gstlab::experiment::registry::entries() {
        assert!(text.contains(e.name), "{} missing", e.name);
    }
}

#[test]
fn validate_accepts_names_and_files() {
    assert!(gstlab(&["validate", "stable15-poly"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.toml");
    std::fs::write(&p, gstlab::experiment::registry::find("logpert-poly").unwrap().toml).unwrap();
    assert!(gstlab(&["validate", p.to_str().unwrap()]).status.success());
}

#[test]
fn unknown_keys_and_names_fail() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    let text = gstlab::experiment::registry::find("harmonic-brownian").unwrap().toml.replace("n_paths", "paths");
    std::fs::write(&p, text).unwrap();
    let out = gstlab(&["validate", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("paths"));
    assert_eq!(gstlab(&["run", "no-such-scenario"]).status.code(), Some(2));
    assert!(!gstlab(&["run", "harmonic-brownian", "--gate-strictness", "lenient"]).status.success());
}

#[test]
fn report_on_a_missing_run_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gstlab(&["report", dir.path().to_str().unwrap()]).status.code(), Some(2));
}
