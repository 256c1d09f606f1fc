//! The run report written to `summary.json`, and its text rendering.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::gates::{GateResult, GateStatus};
use crate::error::{Error, Result};
use crate::fractal::{CoverRow, DyadicRow, SpectrumRow};
use crate::gst::CrossCheck;
use crate::sim::{MartingaleScore, QuantileComparison, StationarityResult, ThinningTest};
use crate::spectral::KatoRow;

#[derive(Debug, Clone, Serialize)]
pub struct EigenBlock {
    pub lambda0: f64,
    pub lambda1: f64,
    pub residual: f64,
    pub ritz_gap: f64,
    pub tail_kind: String,
    pub tail_exponent: f64,
    pub boundary_mass: f64,
    pub doubled_lambda0: Option<f64>,
    pub grid_doubling_drift: Option<f64>,
    /// Max relative error of `φ₀` against the Gaussian oracle, when one exists.
    pub oracle_phi_error: Option<f64>,
    pub oracle_lambda0: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevyReport {
    pub bg_index_analytic: f64,
    pub bg_index_numeric: Option<f64>,
    pub band_masses: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorBlock {
    pub cross_check: CrossCheck,
    pub pull_back_radius: Option<f64>,
    /// `(K, c(K))` for a few windows.
    pub ratio_bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SimulationReport {
    pub martingale: Option<Vec<MartingaleScore>>,
    pub stationarity: Option<StationarityResult>,
    pub stationary_moments: Option<(f64, f64)>,
    pub thinning: Option<ThinningTest>,
    pub compensator: Option<Vec<QuantileComparison>>,
    pub exit_fraction: Option<f64>,
    /// Accepted jumps per unit time, dyadic bands of `(ε_s, 1]`.
    pub band_rates: Option<Vec<f64>>,
    pub replay_hash: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderSummary {
    pub probes: usize,
    pub median_h_hat: Option<f64>,
    pub median_h_theory: Option<f64>,
    pub median_delta_hat: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FractalReport {
    pub paths: usize,
    pub exit_fraction: f64,
    pub scale_window: (f64, f64),
    pub levels: Vec<u32>,
    pub spectrum: Vec<SpectrumRow>,
    pub holder: HolderSummary,
    pub covering: Vec<CoverRow>,
    pub dyadic: Vec<DyadicRow>,
    pub dyadic_growth: Option<f64>,
    pub ratio_bound: f64,
    pub baseline: Option<Vec<SpectrumRow>>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub exploratory: bool,
    pub master_seed: u64,
    pub config_hash: String,
    pub reference_curve: String,
    pub eigen: Option<EigenBlock>,
    pub levy: Option<LevyReport>,
    pub generator: Option<GeneratorBlock>,
    pub simulation: SimulationReport,
    pub fractal: Option<FractalReport>,
    pub kato: Option<Vec<KatoRow>>,
    pub gates: Vec<GateResult>,
    pub errors: Vec<StageError>,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn hard_failures(&self) -> usize {
        self.gates.iter().filter(|g| g.failed_hard()).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// The part of `summary.json` the `report` verb needs.
#[derive(Debug, Clone, Deserialize)]
pub struct SummaryView {
    pub scenario: String,
    pub exploratory: bool,
    pub master_seed: u64,
    pub config_hash: String,
    pub reference_curve: String,
    pub gates: Vec<GateResult>,
    pub errors: Vec<StageError>,
    pub artifacts: Vec<String>,
}

impl SummaryView {
    pub fn load(run_dir: &Path) -> Result<Self> {
        let p = run_dir.join("summary.json");
        let text = std::fs::read_to_string(&p)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "scenario {}{}  seed {}  config {}\nreference curve {}\n\n",
            self.scenario,
            if self.exploratory { " (exploratory)" } else { "" },
            self.master_seed,
            &self.config_hash[..self.config_hash.len().min(12)],
            self.reference_curve
        );
        for g in &self.gates {
            let tag = match (g.status, g.hard) {
                (GateStatus::Pass, _) => "PASS",
                (GateStatus::Fail, true) => "FAIL",
                (GateStatus::Fail, false) => "fail (non-gating)",
                (GateStatus::NotApplicable, _) => "n/a",
            };
            s.push_str(&format!("{:>2} {:<22} {:<18} {}\n", g.id, g.name, tag, g.detail));
        }
        for e in &self.errors {
            s.push_str(&format!("\nerror in {}: {}\n", e.stage, e.message));
        }
        if !self.artifacts.is_empty() {
            s.push_str(&format!("\nartifacts: {}\n", self.artifacts.join(", ")));
        }
        s
    }
}
