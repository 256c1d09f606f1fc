//! Monte Carlo check that a potential is numerically Kato-reasonable.

use rayon::prelude::*;
use serde::Serialize;

use super::potential::PotentialSpec;
use crate::error::Result;
use crate::levy::{LevyModel, LevyPathConfig, LevyPathSampler};
use crate::rng::child_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KatoRow {
    pub t: f64,
    /// `max_x` of the estimate of `E^x ∫_0^t |V(X_s)| ds`.
    pub sup_estimate: f64,
    pub argmax: f64,
}

/// Estimate `sup_x E^x ∫_0^t |V(X_s)| ds` over `starts` for each `t`.
///
/// `window` restricts `|V|` to `|x| ≤ window`; polynomial potentials are not
/// integrable against heavy-tailed laws, and only local behaviour matters for
/// the small-time limit.
pub fn kato_diagnostic(
    model: &LevyModel,
    potential: &PotentialSpec,
    times: &[f64],
    starts: &[f64],
    window: Option<f64>,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<KatoRow>> {
    let v = |x: f64| match window {
        Some(w) if x.abs() > w => 0.0,
        _ => potential.eval(x).abs(),
    };
    let mut rows = Vec::with_capacity(times.len());
    for (ti, &t) in times.iter().enumerate() {
        if t == 0.0 {
            rows.push(KatoRow { t, sup_estimate: 0.0, argmax: starts.first().copied().unwrap_or(0.0) });
            continue;
        }
        let steps = 200;
        let dt = t / steps as f64;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (xi, &x0) in starts.iter().enumerate() {
            let cfg = LevyPathConfig { x0, ..LevyPathConfig::new(t, dt, 0.05f64.min(1.0)) };
            let sampler = LevyPathSampler::new(model, &cfg)?;
            let s = child_seed(seed, &format!("kato-{ti}-{xi}"));
            let total: f64 = (0..n_paths as u64)
                .into_par_iter()
                .map(|p| {
                    let path = sampler.path(s, p);
                    // left Riemann sum of the sampled path
                    path.states[..steps].iter().map(|&x| v(x)).sum::<f64>() * dt
                })
                .collect::<Vec<_>>()
                .iter()
                .sum();
            let est = total / n_paths as f64;
            if est > best.0 {
                best = (est, x0);
            }
        }
        rows.push(KatoRow { t, sup_estimate: best.0, argmax: best.1 });
    }
    Ok(rows)
}
