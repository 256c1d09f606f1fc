//! Scenario files. Every key names its unit or role; unknown keys are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::levy::{LevyDensity, LevyModel};
use crate::sim::{InitLaw, RecordMode, SimConfig};
use crate::spectral::{Grid1D, PotentialSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Exploratory scenarios are run and reported but never gate.
    #[serde(default)]
    pub exploratory: bool,
    pub reference: ReferenceBlock,
    pub levy: LevyBlock,
    pub potential: PotentialSpec,
    pub grid: GridBlock,
    pub simulation: SimulationBlock,
    #[serde(default)]
    pub fractal: Option<FractalBlock>,
    pub kato: KatoBlock,
    /// Used when no seed is given on the command line.
    #[serde(default = "default_seed")]
    pub master_seed: u64,
}

fn default_seed() -> u64 {
    20_240_601
}

/// Expected behaviour the gates compare against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceBlock {
    /// Identifier of the theoretical spectrum curve.
    pub curve: String,
    pub bg_index: f64,
    #[serde(default)]
    pub ground_energy: Option<f64>,
    #[serde(default)]
    pub tail_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyBlock {
    pub diffusion_coefficient: f64,
    pub density: LevyDensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub grid_halfwidth: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub small_jump_cutoff: f64,
    pub window_bound: f64,
    pub n_paths: usize,
    pub martingale_horizon_time: f64,
    pub martingale_time_step: f64,
    pub martingale_times: Vec<f64>,
    pub stationarity_horizon_time: f64,
    pub stationarity_time_step: f64,
    pub thinning_proposals: usize,
    /// Frozen state of the thinning test.
    #[serde(default = "half")]
    pub thinning_state: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractalBlock {
    pub horizon_time: f64,
    pub time_step: f64,
    pub small_jump_cutoff: f64,
    pub window_bound: f64,
    pub n_paths: usize,
    pub holder_probes: usize,
    pub h_grid: Vec<f64>,
    pub covering_deltas: Vec<f64>,
    /// Ensemble of the underlying Lévy process run through the same estimator.
    #[serde(default)]
    pub baseline: Option<BaselineBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineBlock {
    pub horizon_time: f64,
    pub time_step: f64,
    pub small_jump_cutoff: f64,
    pub n_paths: usize,
    pub h_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatoBlock {
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub start_points: usize,
    /// `|V|` is integrated only on `|x| ≤ window_bound`.
    pub window_bound: f64,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical serialization; insensitive to comments and key order.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn levy_model(&self) -> Result<LevyModel> {
        LevyModel::new(self.levy.diffusion_coefficient, self.levy.density.clone())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.grid_halfwidth, self.grid.grid_points)
    }

    pub fn has_jumps(&self) -> bool {
        !self.levy.density.is_zero()
    }

    pub fn martingale_sim(&self, seed: u64) -> SimConfig {
        let s = &self.simulation;
        SimConfig {
            init: InitLaw::Stationary,
            record: RecordMode::AcceptedOnly,
            ..SimConfig::new(s.martingale_horizon_time, s.martingale_time_step, s.small_jump_cutoff, s.window_bound, seed, s.n_paths)
        }
    }

    pub fn stationarity_sim(&self, seed: u64) -> SimConfig {
        let s = &self.simulation;
        SimConfig {
            init: InitLaw::Stationary,
            record: RecordMode::AcceptedOnly,
            ..SimConfig::new(
                s.stationarity_horizon_time,
                s.stationarity_time_step,
                s.small_jump_cutoff,
                s.window_bound,
                seed,
                s.n_paths,
            )
        }
    }

    pub fn fractal_sim(&self, seed: u64) -> Option<SimConfig> {
        self.fractal.as_ref().map(|f| SimConfig {
            init: InitLaw::Stationary,
            record: RecordMode::AcceptedOnly,
            ..SimConfig::new(f.horizon_time, f.time_step, f.small_jump_cutoff, f.window_bound, seed, f.n_paths)
        })
    }

    /// All checks that need no compute. Runs before anything is solved.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("scenario {}: {m}", self.name)));
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name {:?} must be non-empty and path-free", self.name));
        }
        self.levy_model()?;
        self.potential.validate()?;
        let grid = self.grid()?;
        let r = grid.half_width;
        let h = grid.spacing();
        let s = &self.simulation;
        if s.n_paths == 0 {
            return bad("simulation.n_paths must be positive".into());
        }
        if s.martingale_times.iter().any(|&t| !(0.0..=s.martingale_horizon_time).contains(&t)) {
            return bad("martingale_times must lie in [0, martingale_horizon_time]".into());
        }
        if s.thinning_proposals == 0 || s.thinning_state.abs() > s.window_bound {
            return bad("thinning test needs proposals and a state inside the window".into());
        }
        let mut sims = vec![self.martingale_sim(0), self.stationarity_sim(0)];
        if let Some(f) = &self.fractal {
            sims.push(self.fractal_sim(0).expect("fractal block"));
            if f.holder_probes == 0 || f.h_grid.is_empty() || f.covering_deltas.is_empty() {
                return bad("fractal block needs probes, an h grid and covering deltas".into());
            }
            if f.h_grid.iter().chain(&f.covering_deltas).any(|&v| !(v > 0.0)) {
                return bad("h grid and covering deltas must be positive".into());
            }
            if let Some(b) = &f.baseline {
                if !(b.time_step > 0.0 && b.time_step < b.horizon_time && b.small_jump_cutoff > 0.0 && b.small_jump_cutoff <= 1.0)
                {
                    return bad("baseline needs 0 < time_step < horizon_time and a cut-off in (0, 1]".into());
                }
            }
        }
        for c in &sims {
            c.validate(r)?;
            if self.has_jumps() && c.eps_small < h * (1.0 - 1e-12) {
                log::warn!(
                    "scenario {}: cut-off {} is below the grid spacing {h:.4}; the drift table interpolates within a cell",
                    self.name,
                    c.eps_small
                );
            }
        }
        let k = &self.kato;
        if k.times.iter().any(|&t| !(t >= 0.0)) || k.n_paths == 0 || k.start_points == 0 || !(k.window_bound > 0.0) {
            return bad("kato block needs non-negative times, paths, start points and a positive window".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::registry;

    #[test]
    fn registry_scenarios_validate_and_round_trip() {
        for e in registry::entries() {
            let c = e.config().unwrap();
            c.validate().unwrap();
            let back = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.hash(), c.hash());
        }
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = registry::find("harmonic-brownian").unwrap().toml.replace("grid_points", "grid_pts");
        assert!(matches!(ScenarioConfig::from_toml(&text), Err(Error::Parse(_))));
        let text = format!("{}\nspeed = 3\n", registry::find("harmonic-brownian").unwrap().toml);
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn step_beyond_horizon_is_rejected() {
        let mut c = registry::find("harmonic-brownian").unwrap().config().unwrap();
        c.simulation.martingale_time_step = 2.0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = registry::find("stable15-poly").unwrap().config().unwrap();
        let mut b = a.clone();
        b.simulation.n_paths += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::experiment::registry;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_keeps_hash(seed in any::<u64>(), paths in 1usize..100_000, k in 0usize..7) {
            let mut c = registry::entries()[k].config().unwrap();
            c.master_seed = seed;
            c.simulation.n_paths = paths;
            let back = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
            prop_assert_eq!(back.hash(), c.hash());
            prop_assert_eq!(back, c);
        }
    }
}
