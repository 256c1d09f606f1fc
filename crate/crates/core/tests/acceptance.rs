//! Every acceptance criterion, measured on the built-in scenarios.
//!
//! Each non-exploratory scenario is run once. A criterion passes when it was
//! measured on at least one scenario and passed on every scenario it applies
//! to. One line per criterion is printed. The test runs without the libtest
//! harness so that the lines always reach the output.

use std::time::Instant;

use gstlab::experiment::{applies, registry, run_scenario, GateStatus, RunOptions, RunOutcome, Strictness, CRITERIA};
use gstlab::spectral::{discretize_h, ground_state};

/// Wall-clock budget for one oracle eigen-solve.
const SOLVE_BUDGET_S: f64 = 30.0;

fn opts(dir: &std::path::Path, seed: Option<u64>) -> RunOptions {
    RunOptions { seed, out_dir: dir.to_path_buf(), strictness: Strictness::ReportOnly }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let cfgs: Vec<_> = registry::entries().iter().map(|e| e.config().unwrap()).filter(|c| !c.exploratory).collect();
    let runs: Vec<RunOutcome> = cfgs.iter().map(|c| run_scenario(c, &opts(dir.path(), None)).unwrap()).collect();

    // Extra evidence for the first and last criteria.
    let harmonic = registry::find("harmonic-brownian").unwrap().config().unwrap();
    let t = Instant::now();
    let op = discretize_h(&harmonic.levy_model().unwrap(), &harmonic.potential, &harmonic.grid().unwrap()).unwrap();
    ground_state(&op).unwrap();
    let solve_s = t.elapsed().as_secs_f64();

    let first = std::fs::read(runs[0].run_dir.join("summary.json")).unwrap();
    let again_dir = tempfile::tempdir().unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let again = pool.install(|| run_scenario(&harmonic, &opts(again_dir.path(), None)).unwrap());
    let second = std::fs::read(again.run_dir.join("summary.json")).unwrap();
    let other = run_scenario(&harmonic, &opts(again_dir.path(), Some(harmonic.master_seed + 1))).unwrap();
    let third = std::fs::read(other.run_dir.join("summary.json")).unwrap();
    assert_eq!(cfgs[0].name, "harmonic-brownian");

    let mut failed = Vec::new();
    for &(id, name) in &CRITERIA {
        let mut measured = 0;
        let mut ok = true;
        let mut notes = Vec::new();
        for (c, r) in cfgs.iter().zip(&runs) {
            let g = &r.report.gates[id as usize - 1];
            assert_eq!((g.id, g.name.as_str()), (id, name));
            if !applies(c, id) {
                assert_eq!(g.status, GateStatus::NotApplicable, "{} gate {id}", c.name);
                continue;
            }
            measured += 1;
            let pass = g.status == GateStatus::Pass;
            ok &= pass;
            if !pass {
                notes.push(format!("{}: {}", c.name, g.detail));
            }
        }
        match id {
            1 => {
                let fast = solve_s < SOLVE_BUDGET_S;
                ok &= fast;
                notes.push(format!("oracle solve {solve_s:.1} s (budget {SOLVE_BUDGET_S} s)"));
            }
            15 => {
                let same = first == second;
                let moved = first != third;
                ok &= same && moved;
                notes.push(format!(
                    "summary.json {} on a 3-thread rerun, {} under another seed",
                    if same { "byte-identical" } else { "differs" },
                    if moved { "changes" } else { "unchanged" }
                ));
            }
            _ => {}
        }
        ok &= measured > 0;
        println!(
            "criterion {id:>2} {name:<20} {} ({measured} scenario{}){}{}",
            if ok { "PASS" } else { "FAIL" },
            if measured == 1 { "" } else { "s" },
            if notes.is_empty() { "" } else { "  " },
            notes.join("; ")
        );
        if !ok {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
