//! A shrunken end-to-end run: artifacts, headers, the failure marker and strictness.

use gstlab::experiment::{registry, run_scenario, GateStatus, RunOptions, Strictness, SummaryView};

fn small() -> gstlab::experiment::ScenarioConfig {
    let mut c = registry::find("harmonic-brownian").unwrap().config().unwrap();
    c.grid.grid_points = 256;
    c.simulation.n_paths = 300;
    c.kato.n_paths = 50;
    c
}

#[test]
fn artifacts_carry_seed_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let c = small();
    let out = run_scenario(&c, &RunOptions { seed: Some(5), out_dir: dir.path().into(), strictness: Strictness::Hard }).unwrap();
    assert!(out.run_dir.ends_with("harmonic-brownian-seed5"));
    let head = format!("# master_seed=5 config_hash={}", c.hash());
    for a in out.report.artifacts.iter().filter(|a| a.ends_with(".csv")) {
        let text = std::fs::read_to_string(out.run_dir.join(a)).unwrap();
        assert_eq!(text.lines().next().unwrap(), head, "{a}");
        assert_eq!(text.matches("master_seed").count(), 1, "{a}");
    }
    let view = SummaryView::load(&out.run_dir).unwrap();
    assert_eq!(view.gates.len(), 15);
    assert!(view.render().contains("eigen-residual"));
    assert!(std::fs::read_to_string(out.run_dir.join("timings.json")).unwrap().contains("eigen"));
}

#[test]
fn failing_gate_marks_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small();
    // a Gaussian tail has no power-law exponent
    c.reference.tail_exponent = Some(-3.0);
    let hard = run_scenario(&c, &RunOptions { seed: None, out_dir: dir.path().into(), strictness: Strictness::Hard }).unwrap();
    assert_eq!(hard.report.gates[2].status, GateStatus::Fail);
    assert_eq!(hard.exit_code(), 1);
    let marker = std::fs::read_to_string(hard.run_dir.join("FAILED")).unwrap();
    assert!(marker.contains("ground-state-tail"));
    let soft = run_scenario(&c, &RunOptions { seed: None, out_dir: dir.path().into(), strictness: Strictness::ReportOnly }).unwrap();
    assert_eq!(soft.exit_code(), 0);
    assert!(hard.run_dir.join("FAILED").exists());

    // the marker goes once the failure does
    c.reference.tail_exponent = None;
    c.exploratory = true;
    let out = run_scenario(&c, &RunOptions { seed: None, out_dir: dir.path().into(), strictness: Strictness::Hard }).unwrap();
    assert_eq!(out.exit_code(), 0);
    assert!(!out.run_dir.join("FAILED").exists());
}

#[test]
fn invalid_configs_stop_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small();
    c.simulation.martingale_times = vec![3.0];
    assert!(run_scenario(&c, &RunOptions { seed: None, out_dir: dir.path().into(), strictness: Strictness::Hard }).is_err());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}
