//! Approximation rate of a time by the jump point system.
//!
//! For each dyadic size band the distance `d_j` from `t` to the nearest band
//! jump is compared with the typical gap `ρ_j` of that band: `δ_j = ln d_j / ln ρ_j`.
//! `ρ_j` comes from band intensities fitted on all resolved bands at once
//! (growth rate fixed by the BG index) and is calibrated so that `E ln d_j = ln ρ_j`
//! for Poisson points, which makes `δ_j` centred at 1 for a typical time.
//! The estimate is the median of `δ_j` over the deepest half of the resolved
//! bands, floored at 1 and capped at [`DELTA_MAX`].

use serde::Serialize;

use super::points::PointSystem;
use crate::stats;

pub const DELTA_MAX: f64 = 4.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Band statistics shared by all probe times of one point system.
#[derive(Debug, Clone, Serialize)]
pub struct BandGaps {
    /// Resolved bands `j_min..=j_max`.
    pub bands: Vec<u32>,
    /// Sorted jump times per band.
    #[serde(skip)]
    pub times: Vec<Vec<f64>>,
    /// Calibrated typical gap per band.
    pub gap: Vec<f64>,
}

impl BandGaps {
    /// `j_max` is the deepest band whose lower edge `2^{-j-1}` is still above the simulation cut-off.
    pub fn new(ps: &PointSystem, bg: f64, eps_small: f64) -> Option<Self> {
        let j_max = ((1.0 / eps_small).log2().floor() as i64 - 1).max(0) as u32;
        let bands: Vec<u32> = (0..=j_max).collect();
        let times: Vec<Vec<f64>> = bands.iter().map(|&j| ps.band_times(j)).collect();
        // N_j ≈ A 2^{bg j}; Poisson maximum likelihood for A, dominated by the deep bands.
        let total: usize = times.iter().map(Vec::len).sum();
        if total == 0 || ps.horizon <= 0.0 {
            return None;
        }
        let scale: f64 = bands.iter().map(|&j| 2f64.powf(bg * j as f64)).sum();
        let amp = total as f64 / scale;
        let gap = bands
            .iter()
            .map(|&j| {
                let rate = amp * 2f64.powf(bg * j as f64) / ps.horizon;
                (-EULER_GAMMA).exp() / (2.0 * rate)
            })
            .collect();
        Some(Self { bands, times, gap })
    }

    fn distance(&self, b: usize, t: f64) -> Option<f64> {
        let ts = &self.times[b];
        let k = ts.partition_point(|&s| s < t);
        let mut d = f64::INFINITY;
        if k < ts.len() {
            d = d.min(ts[k] - t);
        }
        if k > 0 {
            d = d.min(t - ts[k - 1]);
        }
        d.is_finite().then_some(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub t: f64,
    pub delta: f64,
    pub bands_used: usize,
    pub capped: bool,
}

/// `δ̂_t` from precomputed band gaps; `None` when no deep band has a jump within distance 1.
pub fn approximation_rate_with(gaps: &BandGaps, t: f64) -> Option<RateEstimate> {
    let n = gaps.bands.len();
    let start = n / 2;
    let mut per_band = Vec::new();
    for b in start..n {
        let Some(d) = gaps.distance(b, t) else { continue };
        if d > 1.0 {
            continue;
        }
        let rho = gaps.gap[b];
        let dj = if d <= 0.0 { DELTA_MAX } else { (d.ln() / rho.ln()).clamp(0.0, DELTA_MAX) };
        per_band.push(dj);
    }
    if per_band.is_empty() {
        return None;
    }
    let m = stats::median(&per_band);
    Some(RateEstimate { t, delta: m.clamp(1.0, DELTA_MAX), bands_used: per_band.len(), capped: m >= DELTA_MAX })
}

pub fn approximation_rate(ps: &PointSystem, t: f64, bg: f64, eps_small: f64) -> Option<RateEstimate> {
    approximation_rate_with(&BandGaps::new(ps, bg, eps_small)?, t)
}
