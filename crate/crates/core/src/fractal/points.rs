use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::PathRecord;

/// Accepted jumps of size at most 1 as `(time, |size|)`, ordered in time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSystem {
    pub times: Vec<f64>,
    pub sizes: Vec<f64>,
    /// Length of the observed interval `[0, horizon]`.
    pub horizon: f64,
}

impl PointSystem {
    pub fn new(pairs: &[(f64, f64)], horizon: f64) -> Result<Self> {
        let mut times = Vec::with_capacity(pairs.len());
        let mut sizes = Vec::with_capacity(pairs.len());
        for &(t, r) in pairs {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Domain(format!("jump size {r} outside (0, 1]")));
            }
            if !(0.0..=horizon).contains(&t) {
                return Err(Error::Domain(format!("jump time {t} outside [0, {horizon}]")));
            }
            if times.last().is_some_and(|&p| t <= p) {
                return Err(Error::Domain(format!("jump times must increase strictly (at t = {t})")));
            }
            times.push(t);
            sizes.push(r);
        }
        Ok(Self { times, sizes, horizon })
    }

    /// The accepted small jumps of a path over its usable segment.
    pub fn from_path(path: &PathRecord) -> Self {
        let end = path.valid_until();
        let mut times = Vec::new();
        let mut sizes = Vec::new();
        for j in path.accepted() {
            let r = j.z.abs();
            if j.s > end || r > 1.0 || r == 0.0 {
                continue;
            }
            // Simultaneous proposals are measure-zero; keep the first.
            if times.last().is_some_and(|&p| j.s <= p) {
                continue;
            }
            times.push(j.s);
            sizes.push(r);
        }
        Self { times, sizes, horizon: end }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Times of jumps in the dyadic band `2^{-j-1} ≤ r < 2^{-j}` (band 0 also takes `r = 1`).
    pub fn band_times(&self, j: u32) -> Vec<f64> {
        let hi = 0.5f64.powi(j as i32);
        let lo = 0.5 * hi;
        self.times
            .iter()
            .zip(&self.sizes)
            .filter(|(_, &r)| r >= lo && (r < hi || (j == 0 && r == 1.0)))
            .map(|(&t, _)| t)
            .collect()
    }

    /// Whether `t` lies within `tol` of a jump time.
    pub fn near_jump(&self, t: f64, tol: f64) -> bool {
        let k = self.times.partition_point(|&s| s < t);
        (k < self.times.len() && self.times[k] - t <= tol) || (k > 0 && t - self.times[k - 1] <= tol)
    }
}

/// Range of scales over which regressions are trusted: below, the small-jump
/// substitution and the time step blur the path; above, the horizon does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleWindow {
    pub lo: f64,
    pub hi: f64,
}

impl ScaleWindow {
    pub fn new(eps_small: f64, bg: f64, dt: f64, horizon: f64) -> Self {
        let blur = if bg > 0.0 { eps_small.powf(bg) } else { 0.0 };
        Self { lo: blur.max(4.0 * dt), hi: horizon / 100.0 }
    }

    /// Dyadic levels `k` with `lo ≤ 2^{-k} ≤ hi`.
    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        let k0 = (-self.hi.log2()).ceil().max(0.0) as u32;
        let k1 = (-self.lo.log2()).floor().max(0.0) as u32;
        k0..=k1
    }

    pub fn radii(&self) -> Vec<f64> {
        self.levels().map(|k| 0.5f64.powi(k as i32)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unordered_and_oversized() {
        assert!(PointSystem::new(&[(0.2, 0.1), (0.1, 0.1)], 1.0).is_err());
        assert!(PointSystem::new(&[(0.2, 0.1), (0.2, 0.1)], 1.0).is_err());
        assert!(PointSystem::new(&[(0.2, 1.5)], 1.0).is_err());
        assert!(PointSystem::new(&[(0.1, 0.3), (0.4, 1.0)], 1.0).is_ok());
    }

    #[test]
    fn bands_partition_sizes() {
        let ps = PointSystem::new(&[(0.1, 1.0), (0.2, 0.5), (0.3, 0.49), (0.4, 0.25), (0.5, 0.01)], 1.0).unwrap();
        assert_eq!(ps.band_times(0), vec![0.1, 0.2]);
        assert_eq!(ps.band_times(1), vec![0.3, 0.4]);
        let total: usize = (0..8).map(|j| ps.band_times(j).len()).sum();
        assert_eq!(total, 5);
    }

    #[test]
    fn window_levels() {
        // [max(1e-3^1.5, 4e-5), 1/100] = [4e-5, 0.01] -> 2^-7 .. 2^-14
        let w = ScaleWindow::new(1e-3, 1.5, 1e-5, 1.0);
        assert_eq!(w.levels(), 7..=14);
    }
}
