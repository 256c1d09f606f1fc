//! Simulation of the ground-state SDE and its statistical checks.

mod checks;
mod config;
mod engine;
mod stationary;

pub use checks::*;
pub use config::{InitLaw, RecordMode, SimConfig};
pub use engine::{simulate_ensemble, simulate_path, Kernel, Simulator};
pub use stationary::{sample_stationary_init, GridLaw};
