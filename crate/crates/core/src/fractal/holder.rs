//! Pointwise Hölder exponents: empirical oscillation regression and the
//! prediction from the approximation rate.

use serde::Serialize;

use super::points::{PointSystem, ScaleWindow};
use crate::path::PathRecord;
use crate::stats;

pub const HOLDER_CLAMP: (f64, f64) = (0.0, 1.5);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub t: f64,
    pub h_hat: f64,
    pub r2: f64,
    pub scales: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub delta_hat: Option<f64>,
    pub h_theory: Option<f64>,
}

/// `sup_{|s − t| ≤ ρ} |M_s − M_t|` for every `ρ` in `radii` (ascending), from
/// the grid states and the exact values on both sides of every accepted jump.
pub fn oscillations(path: &PathRecord, t: f64, radii: &[f64]) -> Vec<f64> {
    let mt = path.state_at(t);
    let dt = path.dt;
    let last = path.states.len() - 1;
    let mut out = Vec::with_capacity(radii.len());
    for &rho in radii {
        let a = (t - rho).max(0.0);
        let b = (t + rho).min(path.valid_until());
        let i0 = (a / dt).ceil() as usize;
        let i1 = ((b / dt).floor() as usize).min(last);
        let mut osc: f64 = 0.0;
        if i0 <= i1 {
            for x in &path.states[i0..=i1] {
                osc = osc.max((x - mt).abs());
            }
        }
        for j in path.jumps_in(a, b).iter().filter(|j| j.accepted) {
            osc = osc.max((j.pre_state - mt).abs()).max((j.pre_state + j.z - mt).abs());
        }
        out.push(osc);
    }
    out
}

/// Slope of `log osc` against `log ρ` over the window's dyadic radii, clamped to [0, 1.5].
/// `None` with fewer than four usable scales or outside the usable segment.
pub fn holder_empirical(path: &PathRecord, t: f64, window: &ScaleWindow) -> Option<HolderEstimate> {
    let radii = window.radii();
    let mut radii: Vec<f64> = radii.into_iter().filter(|&r| t - r >= 0.0 && t + r <= path.valid_until()).collect();
    radii.sort_by(f64::total_cmp);
    let osc = oscillations(path, t, &radii);
    let pts: Vec<(f64, f64)> = radii.iter().zip(&osc).filter(|(_, &o)| o > 0.0).map(|(r, o)| (r.ln(), o.ln())).collect();
    if pts.len() < 4 {
        return None;
    }
    let fit = stats::linear_fit(&pts)?;
    Some(HolderEstimate {
        t,
        h_hat: fit.slope.clamp(HOLDER_CLAMP.0, HOLDER_CLAMP.1),
        r2: fit.r2,
        scales: pts.len(),
        rho_min: radii[0],
        rho_max: *radii.last().unwrap(),
        delta_hat: None,
        h_theory: None,
    })
}

/// Predicted exponent at a continuity time with approximation rate `delta`:
/// `1/(δ bg)`, capped at 1/2 when there is a Brownian part.
pub fn holder_theoretical(delta: f64, bg: f64, sigma: f64) -> f64 {
    let jump = if bg > 0.0 { 1.0 / (delta * bg) } else { f64::INFINITY };
    if sigma != 0.0 {
        jump.min(0.5)
    } else {
        jump
    }
}

/// Single-jump bound: a jump of size `r` at distance `d` forces an
/// oscillation of order `r` at scale `d`, so the exponent is at most
/// `log r / log d`. The minimum runs over the nearest jump of each band in
/// `bands` whose distance lies inside the window.
pub fn single_jump_bound(ps: &PointSystem, t: f64, window: &ScaleWindow, bands: std::ops::RangeInclusive<u32>) -> Option<f64> {
    let mut best: Option<f64> = None;
    for j in bands {
        let lo = 0.5f64.powi(j as i32 + 1);
        let hi = 2.0 * lo;
        let mut nearest: Option<(f64, f64)> = None;
        let k = ps.times.partition_point(|&s| s < t);
        // Walk outwards until a band-j jump is found on each side.
        for idx in (0..k).rev() {
            if ps.sizes[idx] >= lo && ps.sizes[idx] < hi {
                nearest = Some((t - ps.times[idx], ps.sizes[idx]));
                break;
            }
            if t - ps.times[idx] > window.hi {
                break;
            }
        }
        for idx in k..ps.times.len() {
            let d = ps.times[idx] - t;
            if nearest.is_some_and(|(nd, _)| d >= nd) || d > window.hi {
                break;
            }
            if ps.sizes[idx] >= lo && ps.sizes[idx] < hi {
                nearest = Some((d, ps.sizes[idx]));
                break;
            }
        }
        let Some((d, r)) = nearest else { continue };
        if d < window.lo || d > window.hi || r >= 1.0 {
            continue;
        }
        let b = r.ln() / d.ln();
        best = Some(best.map_or(b, |x: f64| x.min(b)));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{LevyDensity, LevyModel, LevyPathConfig, LevyPathSampler};
    use crate::path::JumpRecord;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn probes(n: usize, seed: u64) -> Vec<f64> {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| 0.02 + 0.96 * r.random::<f64>()).collect()
    }

    #[test]
    fn theoretical_formula() {
        assert!((holder_theoretical(1.0, 1.5, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(holder_theoretical(1.0, 1.5, 1.0), 0.5);
        assert!((holder_theoretical(4.0, 1.5, 0.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn linear_path_is_smooth() {
        let dt = 2f64.powi(-16);
        let states: Vec<f64> = (0..=1 << 16).map(|i| i as f64 * dt).collect();
        let p = PathRecord { dt, horizon: 1.0, states, jumps: vec![], exit_time: None, trace: None };
        let w = ScaleWindow { lo: 4e-4, hi: 1e-2 };
        let e = holder_empirical(&p, 0.5, &w).unwrap();
        assert!((e.h_hat - 1.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn brownian_exponent_is_one_half() {
        let dt = 2e-6;
        let cfg = LevyPathConfig::new(1.0, dt, 1e-3);
        let s = LevyPathSampler::new(&LevyModel::brownian(1.0), &cfg).unwrap();
        let w = ScaleWindow { lo: 4.0 * dt, hi: 1e-2 };
        let mut hs = Vec::new();
        for k in 0..4 {
            let p = s.path(17, k);
            hs.extend(probes(25, k).into_iter().filter_map(|t| holder_empirical(&p, t, &w)).map(|e| e.h_hat));
        }
        assert_eq!(hs.len(), 100);
        let m = stats::median(&hs);
        assert!((m - 0.5).abs() < 0.1, "median {m}");
    }

    #[test]
    fn stable_exponent_is_inverse_index() {
        let dt = 2e-6;
        let model = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0)).unwrap();
        let cfg = LevyPathConfig::new(1.0, dt, 1e-3);
        let s = LevyPathSampler::new(&model, &cfg).unwrap();
        let w = ScaleWindow::new(1e-3, 1.5, dt, 1.0);
        let mut hs = Vec::new();
        for k in 0..4 {
            let p = s.path(23, k);
            hs.extend(probes(50, 100 + k).into_iter().filter_map(|t| holder_empirical(&p, t, &w)).map(|e| e.h_hat));
        }
        let m = stats::median(&hs);
        assert!((m - 2.0 / 3.0).abs() < 0.1, "median {m}");
    }

    /// Jumps of size `ρ^0.4` planted at distance `0.9ρ` on every dyadic scale:
    /// the bound is close to 0.4 and the regression must respect it.
    #[test]
    fn planted_jumps_respect_the_single_jump_bound() {
        let dt = 2f64.powi(-18);
        let n = 1usize << 18;
        let w = ScaleWindow { lo: 4.0 * dt, hi: 1e-2 };
        let mut jumps = Vec::new();
        let t0 = 0.5;
        for k in 7..=16 {
            let rho = 0.5f64.powi(k);
            let s = t0 + 0.9 * rho * if k % 2 == 0 { 1.0 } else { -1.0 };
            jumps.push(JumpRecord { s, z: rho.powf(0.4), v: 0.5, accepted: true, pre_state: 0.0, x_mark: 0.5 });
        }
        jumps.sort_by(|a, b| a.s.total_cmp(&b.s));
        let mut states = vec![0.0; n + 1];
        let mut acc = 0.0;
        let mut next = 0;
        for (i, x) in states.iter_mut().enumerate() {
            while next < jumps.len() && jumps[next].s <= i as f64 * dt {
                jumps[next].pre_state = acc;
                acc += jumps[next].z;
                next += 1;
            }
            *x = acc;
        }
        let p = PathRecord { dt, horizon: 1.0, states, jumps, exit_time: None, trace: None };
        let ps = PointSystem::from_path(&p);
        let e = holder_empirical(&p, t0, &w).unwrap();
        let b = single_jump_bound(&ps, t0, &w, 0..=40).unwrap();
        assert!((b - 0.4).abs() < 0.05, "bound {b}");
        assert!(e.h_hat <= b + 0.15, "{} vs {b}", e.h_hat);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn predicted_exponent(delta in 1.0f64..4.0, bg in 0.2f64..2.0, sigma in 0.0f64..2.0) {
            let pure = holder_theoretical(delta, bg, 0.0);
            prop_assert!((pure * delta * bg - 1.0).abs() < 1e-12);
            let h = holder_theoretical(delta, bg, sigma);
            prop_assert!(h <= pure + 1e-15);
            if sigma > 0.0 {
                prop_assert!(h <= 0.5);
            }
            prop_assert!(holder_theoretical(delta * 1.5, bg, sigma) <= h);
        }
    }
}
