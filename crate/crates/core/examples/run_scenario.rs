//! End-to-end run of a built-in scenario into a temporary directory.
//! Usage: `cargo run --example run_scenario -- [name]` (default harmonic-brownian).

use gstlab::experiment::{registry, run_scenario, RunOptions, Strictness, SummaryView};

fn main() -> gstlab::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "harmonic-brownian".into());
    let entry = registry::find(&name).ok_or_else(|| gstlab::Error::Config(format!("unknown scenario {name}")))?;
    let opts = RunOptions {
        seed: None,
        out_dir: std::env::temp_dir().join("gstlab-example"),
        strictness: Strictness::ReportOnly,
    };
    let out = run_scenario(&entry.config()?, &opts)?;
    print!("{}", SummaryView::load(&out.run_dir)?.render());
    Ok(())
}
