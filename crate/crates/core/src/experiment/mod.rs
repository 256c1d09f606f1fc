//! Scenario configuration, the built-in registry, end-to-end runs and their gates.

pub mod config;
pub mod gates;
pub mod registry;
pub mod report;
pub mod run;

pub use config::ScenarioConfig;
pub use gates::{GateResult, GateStatus, CRITERIA};
pub use report::{RunReport, SummaryView};
pub use run::{applies, resolve, run_config_path, run_scenario, RunOptions, RunOutcome, Strictness};
