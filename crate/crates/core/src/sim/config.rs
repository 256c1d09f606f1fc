use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitLaw {
    Point { x0: f64 },
    /// The grid law `φ₀² h`.
    Stationary,
}

/// Which proposals to keep in the path record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordMode {
    /// Every proposal with its marks.
    Full,
    /// Accepted jumps only; enough for the point system and much lighter.
    AcceptedOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub horizon: f64,
    pub dt: f64,
    pub eps_small: f64,
    /// Paths leaving `|x| ≤ window` are truncated and flagged.
    pub window: f64,
    pub seed: u64,
    pub n_paths: usize,
    pub init: InitLaw,
    pub record: RecordMode,
    #[serde(default)]
    pub record_trace: bool,
}

impl SimConfig {
    pub fn new(horizon: f64, dt: f64, eps_small: f64, window: f64, seed: u64, n_paths: usize) -> Self {
        Self {
            horizon,
            dt,
            eps_small,
            window,
            seed,
            n_paths,
            init: InitLaw::Stationary,
            record: RecordMode::Full,
            record_trace: false,
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Checks against the grid half-width `r` of the ground state.
    pub fn validate(&self, r: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.horizon >= 0.0) {
            return Err(Error::Config(format!("need dt > 0 and T ≥ 0 (dt={}, T={})", self.dt, self.horizon)));
        }
        if self.dt > self.horizon && self.horizon > 0.0 {
            return Err(Error::Config(format!("time step {} exceeds the horizon {}", self.dt, self.horizon)));
        }
        if self.horizon > 0.0 && self.dt > 1e-3 * self.horizon * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "time step {} is coarser than 1e-3 of the horizon {}",
                self.dt, self.horizon
            )));
        }
        if !(self.eps_small > 0.0 && self.eps_small <= 1.0) {
            return Err(Error::Config(format!("small-jump cut-off must lie in (0, 1], got {}", self.eps_small)));
        }
        if !(self.window > 0.0) || self.window > r - 1.0 {
            return Err(Error::Config(format!(
                "window {} must be positive and at most R − 1 = {}",
                self.window,
                r - 1.0
            )));
        }
        if let InitLaw::Point { x0 } = self.init {
            if x0.abs() > self.window {
                return Err(Error::Config(format!("initial point {x0} lies outside the window")));
            }
        }
        Ok(())
    }
}
