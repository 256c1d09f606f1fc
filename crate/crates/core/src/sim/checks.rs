//! Statistical checks of the simulated ground-state process.

use serde::Serialize;

use super::config::{InitLaw, RecordMode, SimConfig};
use super::engine::{Kernel, Simulator};
use super::stationary::GridLaw;
use crate::error::{Error, Result};
use crate::gst::{generator_table, Bump, GstModel};
use crate::levy::{LevyPathConfig, LevyPathSampler};
use crate::path::PathRecord;
use crate::rng::{self, Purpose};
use crate::stats;

/// Exited fraction above which ensemble statistics are flagged.
pub const UNRELIABLE_EXIT_FRACTION: f64 = 0.2;

pub fn exit_fraction(paths: &[PathRecord]) -> f64 {
    if paths.is_empty() {
        return 0.0;
    }
    paths.iter().filter(|p| p.exited()).count() as f64 / paths.len() as f64
}

/// Number of stored jumps whose accepted flag disagrees with `v ≤ ratio(pre_state, z)`.
pub fn acceptance_mismatches(sim: &Simulator, path: &PathRecord) -> usize {
    path.jumps.iter().filter(|j| (j.v <= sim.ratio(j.pre_state, j.z)) != j.accepted).count()
}

/// Largest gap between consecutive recorded states and the sum of their recorded
/// parts. Needs a path simulated with `record_trace`.
pub fn reconstruction_error(path: &PathRecord) -> Option<f64> {
    let trace = path.trace.as_ref()?;
    let mut worst: f64 = 0.0;
    for (i, tr) in trace.iter().enumerate() {
        if i + 1 >= path.states.len() {
            break;
        }
        let t0 = i as f64 * path.dt;
        let jumps: f64 = path.jumps_in(t0, t0 + path.dt).iter().filter(|j| j.accepted).map(|j| j.z).sum();
        let rebuilt = path.states[i] + jumps + (tr.drift - tr.compensator) * path.dt + tr.gauss;
        worst = worst.max((path.states[i + 1] - rebuilt).abs());
    }
    Some(worst)
}

/// Accepted jumps per unit time in the dyadic band `2^{-j-1} < |z| ≤ 2^{-j}`,
/// averaged over the usable segment of every path.
pub fn accepted_band_rates(paths: &[PathRecord], j_max: u32) -> Vec<f64> {
    let mut counts = vec![0.0; j_max as usize + 1];
    let mut time = 0.0;
    for p in paths {
        let end = p.valid_until();
        time += end;
        for j in p.accepted().filter(|j| j.s <= end) {
            let band = (-j.z.abs().log2()).floor();
            if band >= 0.0 && (band as usize) < counts.len() {
                counts[band as usize] += 1.0;
            }
        }
    }
    if time > 0.0 {
        counts.iter_mut().for_each(|c| *c /= time);
    }
    counts
}

/// Lag correlation of the stationary ensemble between steps 0 and `lag`,
/// with its normal-theory standard error `(1 − ρ²)/√n`.
pub fn lag_correlation(paths: &[PathRecord], lag: usize) -> (f64, f64) {
    let pairs: Vec<(f64, f64)> =
        paths.iter().filter(|p| p.states.len() > lag).map(|p| (p.states[0], p.states[lag])).collect();
    let n = pairs.len() as f64;
    let (ma, mb) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let rho = sab / (saa * sbb).sqrt();
    (rho, (1.0 - rho * rho) / n.sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleScore {
    pub bump: Bump,
    pub t: f64,
    pub mean: f64,
    pub se: f64,
    pub z: f64,
    pub paths_used: usize,
    pub exit_fraction: f64,
    pub reliable: bool,
}

/// Generator of `f` tabulated on the nodes, with refused nodes filled from the nearest admissible one.
fn filled_table(gst: &GstModel, f: &Bump) -> Vec<f64> {
    let nodes = gst.gs.grid.nodes();
    let raw = generator_table(gst, &f.sample(&nodes));
    let first = raw.iter().position(Option::is_some).unwrap_or(0);
    let last = raw.iter().rposition(Option::is_some).unwrap_or(raw.len() - 1);
    raw.iter()
        .enumerate()
        .map(|(i, v)| v.unwrap_or_else(|| raw[i.clamp(first, last)].unwrap_or(0.0)))
        .collect()
}

/// Four-point Lagrange interpolation of a node table.
fn cubic(tab: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let n = tab.len();
    let p = ((x - x0) / h).clamp(1.0, (n - 3) as f64);
    let k = (p.floor() as usize).clamp(1, n - 3);
    let t = p - k as f64;
    let (a, b, c, d) = (tab[k - 1], tab[k], tab[k + 1], tab[k + 2]);
    b + 0.5 * t * (c - a + t * (2.0 * a - 5.0 * b + 4.0 * c - d + t * (3.0 * (b - c) + d - a)))
}

/// Standardized ensemble mean of `f(M_t) − f(M_0) − ∫₀ᵗ L̃f(M_r) dr` for every
/// bump and time. The integral is the trapezoid rule on the step grid.
pub fn martingale_check(gst: &GstModel, cfg: &SimConfig, bumps: &[Bump], times: &[f64]) -> Result<Vec<MartingaleScore>> {
    let sim = Simulator::new(gst, cfg)?;
    let tables: Vec<Vec<f64>> = bumps.iter().map(|b| filled_table(gst, b)).collect();
    let x0 = -gst.gs.grid.half_width;
    let h = gst.gs.grid.spacing();
    let steps: Vec<usize> = times.iter().map(|t| (t / cfg.dt).round() as usize).collect();
    if steps.iter().any(|&s| s > cfg.steps()) {
        return Err(Error::Config("martingale time beyond the horizon".into()));
    }
    // Per path: None if it exited before the time, else one value per (bump, time).
    let per_path = sim.map_paths(|_, p| {
        let mut out = Vec::with_capacity(bumps.len() * steps.len());
        for (b, tab) in bumps.iter().zip(&tables) {
            let mut integral = 0.0;
            let mut prev = cubic(tab, x0, h, p.states[0]);
            let mut k = 0;
            for &s in &steps {
                if s >= p.states.len() || p.exit_time.is_some_and(|e| e <= s as f64 * cfg.dt) {
                    out.push(None);
                    continue;
                }
                while k < s {
                    let next = cubic(tab, x0, h, p.states[k + 1]);
                    integral += 0.5 * (prev + next) * cfg.dt;
                    prev = next;
                    k += 1;
                }
                out.push(Some(b.eval(p.states[s]) - b.eval(p.states[0]) - integral));
            }
        }
        out
    })?;
    let exit = if per_path.is_empty() {
        0.0
    } else {
        per_path.iter().filter(|v| v.iter().any(Option::is_none)).count() as f64 / per_path.len() as f64
    };
    let mut scores = Vec::new();
    for (bi, b) in bumps.iter().enumerate() {
        for (ti, &t) in times.iter().enumerate() {
            let col = bi * times.len() + ti;
            let xs: Vec<f64> = per_path.iter().filter_map(|v| v[col]).collect();
            let (mean, se) = stats::mean_se(&xs);
            let z = if t == 0.0 || se == 0.0 { 0.0 } else { mean / se };
            scores.push(MartingaleScore {
                bump: *b,
                t,
                mean,
                se,
                z,
                paths_used: xs.len(),
                exit_fraction: exit,
                reliable: exit <= UNRELIABLE_EXIT_FRACTION,
            });
        }
    }
    Ok(scores)
}

#[derive(Debug, Clone, Serialize)]
pub struct StationarityResult {
    pub t: f64,
    pub ks: f64,
    pub critical: f64,
    pub paths_used: usize,
    pub exit_fraction: f64,
    pub reliable: bool,
}

/// KS distance between the law of `M_t` under a stationary start and the grid law.
pub fn stationarity_check(gst: &GstModel, cfg: &SimConfig, t: f64) -> Result<StationarityResult> {
    if cfg.init != InitLaw::Stationary {
        return Err(Error::Config("stationarity check needs the stationary initial law".into()));
    }
    let mut cfg = cfg.clone();
    cfg.record = RecordMode::AcceptedOnly;
    let s = (t / cfg.dt).round() as usize;
    if s > cfg.steps() {
        return Err(Error::Config("stationarity time beyond the horizon".into()));
    }
    let sim = Simulator::new(gst, &cfg)?;
    let vals = sim.map_paths(|_, p| (s < p.states.len() && !p.exit_time.is_some_and(|e| e <= t)).then(|| p.states[s]))?;
    let n = vals.len();
    let sample: Vec<f64> = vals.iter().flatten().copied().collect();
    let exit = if n == 0 { 0.0 } else { 1.0 - sample.len() as f64 / n as f64 };
    let law = GridLaw::from_ground_state(&gst.gs);
    Ok(StationarityResult {
        t,
        ks: stats::ks_statistic(&sample, |x| law.cdf(x)),
        critical: stats::ks_critical_001(sample.len().max(1)),
        paths_used: sample.len(),
        exit_fraction: exit,
        reliable: exit <= UNRELIABLE_EXIT_FRACTION,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThinningTest {
    pub state: f64,
    pub proposals: usize,
    pub accepted: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// `u` with `ω(u) = target`, by bisection in `log u`.
fn omega_inverse(gst: &GstModel, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (gst.eps_small.ln(), 0.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gst.levy.omega(mid.exp())? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// With the state frozen at `x`, accepted small-band jump sizes should follow
/// `ratio(x, z) ν(z)` on `ε_s < |z| ≤ 1`. Pearson test on 20 signed bins of equal ν mass.
pub fn thinning_chi_square(gst: &GstModel, cfg: &SimConfig, x: f64, proposals: usize) -> Result<ThinningTest> {
    let sim = Simulator::new(gst, cfg)?;
    let small_rate = gst.levy.omega(gst.eps_small)?;
    if small_rate == 0.0 {
        return Err(Error::Config("no small-band jumps to thin".into()));
    }
    let per_side = 10;
    let mut edges = vec![gst.eps_small];
    for k in 1..per_side {
        edges.push(omega_inverse(gst, small_rate * (1.0 - k as f64 / per_side as f64))?);
    }
    edges.push(1.0);
    // Bins ordered: negative side from −1 up, then positive side from ε_s up.
    let mut weight = Vec::with_capacity(2 * per_side);
    for sign in [-1.0, 1.0] {
        for w in edges.windows(2) {
            weight.push(gst.levy.integrate_nu(w[0], w[1], |z| sim.ratio(x, sign * z))?);
        }
    }
    let mut rng = rng::stream(cfg.seed, Purpose::Thinning, 0);
    let env = sim.envelope(x);
    let mut obs = vec![0.0; 2 * per_side];
    let mut accepted = 0;
    let mut made = 0;
    while made < proposals {
        let (z, _, acc) = sim.propose(&mut rng, x, &env)?;
        if z.abs() > 1.0 {
            continue;
        }
        made += 1;
        if acc {
            accepted += 1;
            let k = edges.partition_point(|&e| e < z.abs()).clamp(1, per_side) - 1;
            obs[if z < 0.0 { k } else { per_side + k }] += 1.0;
        }
    }
    let total: f64 = weight.iter().sum();
    let exp: Vec<f64> = weight.iter().map(|w| accepted as f64 * w / total).collect();
    let (statistic, p_value, dof) = stats::chi_square(&obs, &exp);
    Ok(ThinningTest { state: x, proposals, accepted, statistic, dof, p_value })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantileComparison {
    pub level: f64,
    /// Reference quantile from the Lévy sampler.
    pub reference: f64,
    /// Fraction of simulator endpoints below the reference quantile.
    pub simulated_level: f64,
    pub se: f64,
    pub z: f64,
}

/// State a truncated path left the window with (the exiting jump target or the last Euler state).
fn endpoint(p: &PathRecord) -> f64 {
    let last = p.final_state();
    match p.exit_time {
        Some(_) => match p.accepted().last() {
            Some(j) if (j.pre_state + j.z).abs() > last.abs() => j.pre_state + j.z,
            _ => last,
        },
        None => last,
    }
}

/// With the ratio forced to 1 the simulator must reproduce the Lévy process:
/// compares the law of `M_T` from both samplers at five quantile levels.
pub fn compensator_consistency(gst: &GstModel, cfg: &SimConfig) -> Result<Vec<QuantileComparison>> {
    let mut cfg = cfg.clone();
    cfg.init = InitLaw::Point { x0: 0.0 };
    cfg.record = RecordMode::AcceptedOnly;
    let sim = Simulator::with_kernel(gst, &cfg, Kernel::Unit)?;
    let mut a: Vec<f64> = sim.map_paths(|_, p| endpoint(&p))?;
    let mut lcfg = LevyPathConfig::new(cfg.horizon, cfg.dt, cfg.eps_small);
    lcfg.x0 = 0.0;
    let levy = LevyPathSampler::new(&gst.levy, &lcfg)?;
    let seed = rng::child_seed(cfg.seed, "reference");
    let mut b: Vec<f64> = {
        use rayon::prelude::*;
        (0..cfg.n_paths as u64).into_par_iter().map(|i| levy.path(seed, i).final_state()).collect()
    };
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    let m = b.len() as f64;
    Ok([0.1, 0.25, 0.5, 0.75, 0.9]
        .iter()
        .map(|&q| {
            let r = stats::quantile(&b, q);
            let f = a.partition_point(|&x| x < r) as f64 / n;
            let se = (q * (1.0 - q) * (1.0 / n + 1.0 / m)).sqrt();
            QuantileComparison { level: q, reference: r, simulated_level: f, se, z: (f - q) / se }
        })
        .collect())
}

/// A stationary-start sample of `n` initial points; used by callers that only need the law.
pub fn stationary_sample(gst: &GstModel, seed: u64, n: usize) -> Vec<f64> {
    let law = GridLaw::from_ground_state(&gst.gs);
    (0..n as u64)
        .map(|i| {
            let mut r = rng::stream(seed, Purpose::StationaryInit, i);
            law.sample(&mut r)
        })
        .collect()
}
