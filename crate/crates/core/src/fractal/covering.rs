//! Lebesgue measure of the limsup covering sets
//! `A(ε, δ) = ∪_{r_n ≤ ε} (t_n − r_n^{bg δ}, t_n + r_n^{bg δ})`.

use serde::Serialize;

use super::points::PointSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverRow {
    pub epsilon: f64,
    pub delta: f64,
    /// `|A(ε, δ) ∩ [0, T]| / T`.
    pub measure_fraction: f64,
}

/// Exact measure of a union of intervals clipped to `[0, t_max]`.
fn union_length(mut iv: Vec<(f64, f64)>, t_max: f64) -> f64 {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in iv {
        let (a, b) = (a.max(0.0), b.min(t_max));
        if b <= a {
            continue;
        }
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((ca, cb)) = cur {
        total += cb - ca;
    }
    total
}

/// One row per `ε` in `eps_grid`, using the jumps with `r_n ≤ ε`.
pub fn covering_measure(ps: &PointSystem, delta: f64, bg: f64, eps_grid: &[f64]) -> Vec<CoverRow> {
    let t_max = ps.horizon;
    eps_grid
        .iter()
        .map(|&eps| {
            let iv: Vec<(f64, f64)> = ps
                .times
                .iter()
                .zip(&ps.sizes)
                .filter(|(_, &r)| r <= eps)
                .map(|(&t, &r)| {
                    let w = r.powf(bg * delta);
                    (t - w, t + w)
                })
                .collect();
            let m = if t_max > 0.0 { union_length(iv, t_max) / t_max } else { 0.0 };
            CoverRow { epsilon: eps, delta, measure_fraction: m }
        })
        .collect()
}

/// Dyadic `ε` grid from 1 down to the smallest scale still above the cut-off, largest first.
pub fn dyadic_eps_grid(eps_small: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut e = 1.0;
    while e >= 2.0 * eps_small {
        out.push(e);
        e *= 0.5;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_jump_is_one_interval() {
        let ps = PointSystem::new(&[(0.5, 0.01)], 1.0).unwrap();
        let row = covering_measure(&ps, 1.0, 1.5, &[0.5])[0];
        assert!((row.measure_fraction - 2.0 * 0.01f64.powf(1.5)).abs() < 1e-15);
        // Near the edge the interval is clipped.
        let ps = PointSystem::new(&[(0.0, 0.5)], 1.0).unwrap();
        let row = covering_measure(&ps, 1.0, 1.0, &[1.0])[0];
        assert!((row.measure_fraction - 0.5).abs() < 1e-15);
    }

    #[test]
    fn jumps_above_epsilon_are_ignored() {
        let ps = PointSystem::new(&[(0.5, 0.3)], 1.0).unwrap();
        assert_eq!(covering_measure(&ps, 1.0, 1.5, &[0.1])[0].measure_fraction, 0.0);
    }

    #[test]
    fn grid_stops_at_cutoff() {
        let g = dyadic_eps_grid(1e-3);
        assert_eq!(g.len(), 9);
        assert_eq!(*g.last().unwrap(), 2f64.powi(-8));
    }

    proptest! {
        #[test]
        fn monotone_in_epsilon_and_delta(
            raw in proptest::collection::vec((0.0f64..1.0, 1e-3f64..1.0), 1..60),
            d1 in 0.5f64..2.0,
            d2 in 0.5f64..2.0,
        ) {
            let mut raw = raw;
            raw.sort_by(|a, b| a.0.total_cmp(&b.0));
            raw.dedup_by(|a, b| a.0 == b.0);
            let ps = PointSystem::new(&raw, 1.0).unwrap();
            let grid = dyadic_eps_grid(1e-3);
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let a = covering_measure(&ps, lo, 1.5, &grid);
            let b = covering_measure(&ps, hi, 1.5, &grid);
            for w in a.windows(2) {
                prop_assert!(w[1].measure_fraction <= w[0].measure_fraction + 1e-15);
            }
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(y.measure_fraction <= x.measure_fraction + 1e-15);
                prop_assert!((0.0..=1.0).contains(&x.measure_fraction));
            }
        }
    }
}
