use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gstlab::experiment::{registry, resolve, run_scenario, RunOptions, Strictness, SummaryView};

#[derive(Parser)]
#[command(name = "gstlab", version, about = "Ground-state-transformed jump processes: solve, simulate, analyze, gate")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Master seed; overrides the scenario's own.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "runs")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = GateMode::Hard)]
    gate_strictness: GateMode,
}

#[derive(Clone, Copy, ValueEnum)]
enum GateMode {
    Hard,
    ReportOnly,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario given as a TOML path or a built-in name.
    Run { config: String },
    /// List the built-in scenarios.
    List,
    /// Parse and check a scenario without computing anything.
    Validate { config: String },
    /// Print the gate table of a finished run.
    Report { run_dir: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> gstlab::Result<u8> {
    match &cli.cmd {
        Cmd::List => {
            for e in registry::entries() {
                println!("{:<20} {}", e.name, e.summary);
            }
            Ok(0)
        }
        Cmd::Validate { config } => {
            let cfg = resolve(config)?;
            cfg.validate()?;
            println!("{}: ok (config_hash {})", cfg.name, cfg.hash());
            Ok(0)
        }
        Cmd::Run { config } => {
            let cfg = resolve(config)?;
            let opts = RunOptions {
                seed: cli.seed,
                out_dir: cli.out_dir.clone(),
                strictness: match cli.gate_strictness {
                    GateMode::Hard => Strictness::Hard,
                    GateMode::ReportOnly => Strictness::ReportOnly,
                },
            };
            let out = run_scenario(&cfg, &opts)?;
            print!("{}", SummaryView::load(&out.run_dir)?.render());
            println!("run directory: {}", out.run_dir.display());
            Ok(out.exit_code() as u8)
        }
        Cmd::Report { run_dir } => {
            print!("{}", SummaryView::load(run_dir)?.render());
            Ok(0)
        }
    }
}
