//! Counts of accepted jumps per dyadic size band over unit time windows.

use serde::Serialize;

use super::points::PointSystem;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicRow {
    pub j: u32,
    pub count: f64,
    /// Band mass `C_j`.
    pub band_mass: f64,
    pub lower: f64,
    pub upper: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DyadicCounts {
    pub rows: Vec<DyadicRow>,
    /// Fitted growth exponent of `N_j` in `j`.
    pub growth: Option<f64>,
}

impl DyadicCounts {
    pub fn all_inside(&self) -> bool {
        self.rows.iter().all(|r| r.inside)
    }
}

/// `N_j` on `[0, 1]` against the thinned-Poisson band
/// `[c C_j − 3√(C_j/c), C_j/c + 3√(C_j/c)]`, which holds whenever the ratio
/// stays within `[c, 1/c]`. `band_mass[j]` is `C_j`.
pub fn dyadic_jump_counts(ps: &PointSystem, ratio_bound: f64, band_mass: &[f64]) -> DyadicCounts {
    let c = ratio_bound;
    let mut rows = Vec::with_capacity(band_mass.len());
    for (j, &cj) in band_mass.iter().enumerate() {
        let count = ps.band_times(j as u32).iter().filter(|&&t| t <= 1.0).count() as f64;
        let spread = 3.0 * (cj / c).sqrt();
        let lower = c * cj - spread;
        let upper = cj / c + spread;
        rows.push(DyadicRow { j: j as u32, count, band_mass: cj, lower, upper, inside: count >= lower && count <= upper });
    }
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.count > 0.0).map(|r| (r.j as f64, r.count.log2())).collect();
    let growth = if pts.len() >= 3 { stats::ols_slope(&pts) } else { None };
    DyadicCounts { rows, growth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{LevyDensity, LevyModel, LevyPathConfig, LevyPathSampler};

    #[test]
    fn no_jumps_no_counts() {
        let ps = PointSystem::new(&[], 1.0).unwrap();
        let d = dyadic_jump_counts(&ps, 1.0, &[0.0; 6]);
        assert!(d.rows.iter().all(|r| r.count == 0.0));
        assert!(d.all_inside());
        assert!(d.growth.is_none());
    }

    #[test]
    fn stable_counts_grow_at_the_index() {
        let model = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0)).unwrap();
        let cfg = LevyPathConfig::new(1.0, 1e-4, 1e-3);
        let p = LevyPathSampler::new(&model, &cfg).unwrap().path(31, 0);
        let ps = PointSystem::from_path(&p);
        let masses: Vec<f64> = (0..9).map(|j| model.dyadic_band_mass(j).unwrap()).collect();
        let d = dyadic_jump_counts(&ps, 1.0, &masses);
        let r = d.growth.unwrap();
        assert!((1.3..=1.7).contains(&r), "{r}");
        assert!(d.all_inside(), "{:?}", d.rows);
    }
}
