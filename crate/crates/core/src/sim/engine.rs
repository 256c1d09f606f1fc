//! Euler scheme for the ground-state SDE with Poisson thinning.
//!
//! Per step the drift and the Gaussian part are frozen at the step start.
//! Jumps are proposed band by band (dyadic size bands on `(ε_s, 1]` and the
//! band `|z| > 1`) from `ν` at rate `C_k U_k` and accepted when the mark
//! `v ~ U(0, U_k]` falls below the ratio at the pre-jump state. The envelope
//! `U_k` bounds the ratio over the band for every state in a small
//! neighbourhood of the current one. It is refreshed when the state leaves
//! that neighbourhood, and the exponential clock is redrawn then, which is
//! exact by memorylessness.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use super::config::{InitLaw, RecordMode, SimConfig};
use super::stationary::GridLaw;
use crate::error::{Error, Result};
use crate::gst::GstModel;
use crate::levy::{BandSampler, BigJumpSampler};
use crate::path::{JumpRecord, PathRecord, StepTrace};
use crate::rng::{self, Purpose};

/// Jump kernel used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `ratio(x, z) ν(z)`: the transformed process.
    GroundState,
    /// `ν(z)`: ratio forced to 1, drift and compensator vanish. Reproduces the Lévy process.
    Unit,
}

#[derive(Debug, Clone)]
enum Sizes {
    Band(BandSampler),
    Big(BigJumpSampler),
}

/// One proposal band: sizes in `(lo, hi]` (`hi = ∞` for the big jumps).
#[derive(Debug, Clone)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    /// Two-sided `ν` mass.
    pub mass: f64,
    sizes: Sizes,
}

/// Band envelopes valid for every state in `[a, b]`.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub a: f64,
    pub b: f64,
    pub tops: Vec<f64>,
    /// Cumulative proposal rates `Σ_{k' ≤ k} C_k' U_k'`.
    cum: Vec<f64>,
}

impl Envelope {
    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }
}

#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    pub gst: &'a GstModel,
    pub cfg: SimConfig,
    pub kernel: Kernel,
    /// `c(K)`: lower ratio bound over the window, reported and used by the count checks.
    pub ratio_bound: f64,
    pub bands: Vec<Band>,
    law: GridLaw,
    drift_tab: Vec<f64>,
    comp_tab: Vec<f64>,
    sd_tab: Vec<f64>,
    x0: f64,
    h: f64,
    /// Half-width of the envelope neighbourhood.
    reach: f64,
}

impl<'a> Simulator<'a> {
    pub fn new(gst: &'a GstModel, cfg: &SimConfig) -> Result<Self> {
        Self::with_kernel(gst, cfg, Kernel::GroundState)
    }

    pub fn with_kernel(gst: &'a GstModel, cfg: &SimConfig, kernel: Kernel) -> Result<Self> {
        cfg.validate(gst.gs.grid.half_width)?;
        if (cfg.eps_small - gst.eps_small).abs() > 1e-15 * gst.eps_small {
            return Err(Error::Config(format!(
                "simulation cut-off {} differs from the model's {}",
                cfg.eps_small, gst.eps_small
            )));
        }
        let levy = &gst.levy;
        let ratio_bound = match kernel {
            Kernel::GroundState => gst.local_ratio_bound(cfg.window)?,
            Kernel::Unit => 1.0,
        };
        let mut bands = Vec::new();
        if !levy.density.is_zero() {
            let mut edges = vec![1.0];
            while edges.last().unwrap() * 0.5 > cfg.eps_small {
                let e = edges.last().unwrap() * 0.5;
                edges.push(e);
            }
            edges.push(cfg.eps_small);
            edges.reverse();
            for w in edges.windows(2) {
                let mass = 2.0 * levy.integrate_nu(w[0], w[1], |_| 1.0)?;
                if mass > 0.0 {
                    bands.push(Band {
                        lo: w[0],
                        hi: w[1],
                        mass,
                        sizes: Sizes::Band(BandSampler::new(&levy.density, w[0], w[1])),
                    });
                }
            }
            let mass = levy.tail_mass(1.0)?;
            if mass > 0.0 {
                bands.push(Band { lo: 1.0, hi: f64::INFINITY, mass, sizes: Sizes::Big(BigJumpSampler::new(&levy.density)) });
            }
        }
        let grid = &gst.gs.grid;
        let n = grid.points;
        let s2 = levy.sigma * levy.sigma;
        let mut drift_tab = vec![0.0; n];
        let mut comp_tab = vec![0.0; n];
        let mut sd_tab = vec![0.0; n];
        for i in 0..n {
            let x = grid.x(i);
            match kernel {
                Kernel::GroundState => {
                    drift_tab[i] = gst.drift.total_at_node(i);
                    comp_tab[i] = gst.drift.compensator[i];
                    sd_tab[i] = ((s2 + gst.small_jump_variance(x)) * cfg.dt).sqrt();
                }
                Kernel::Unit => {
                    sd_tab[i] = ((s2 + gst.m2_small) * cfg.dt).sqrt();
                }
            }
        }
        Ok(Self {
            gst,
            cfg: cfg.clone(),
            kernel,
            ratio_bound,
            bands,
            law: GridLaw::from_ground_state(&gst.gs),
            drift_tab,
            comp_tab,
            sd_tab,
            x0: -grid.half_width,
            h: grid.spacing(),
            reach: 2.0 * grid.spacing(),
        })
    }

    #[inline]
    fn lerp(&self, tab: &[f64], x: f64) -> f64 {
        let p = ((x - self.x0) / self.h).clamp(0.0, (tab.len() - 1) as f64);
        let k = (p as usize).min(tab.len() - 2);
        let t = p - k as f64;
        tab[k] + t * (tab[k + 1] - tab[k])
    }

    #[inline]
    pub fn ratio(&self, x: f64, z: f64) -> f64 {
        match self.kernel {
            Kernel::GroundState => self.gst.ratio(x, z),
            Kernel::Unit => 1.0,
        }
    }

    /// Envelopes for states within the neighbourhood of `x`.
    pub fn envelope(&self, x: f64) -> Envelope {
        let (a, b) = (x - self.reach, x + self.reach);
        let mut tops = Vec::with_capacity(self.bands.len());
        let mut cum = Vec::with_capacity(self.bands.len());
        let mut acc = 0.0;
        let inf = match self.kernel {
            Kernel::GroundState => self.gst.phi_range(a, b).1,
            Kernel::Unit => 1.0,
        };
        for band in &self.bands {
            let top = match (self.kernel, &band.sizes) {
                (Kernel::Unit, _) => 1.0,
                (Kernel::GroundState, Sizes::Big(_)) => self.gst.big_jump_envelope_over(a, b),
                (Kernel::GroundState, Sizes::Band(_)) => {
                    let l = self.gst.phi_range(a - band.hi, b - band.lo).0;
                    let r = self.gst.phi_range(a + band.lo, b + band.hi).0;
                    l.max(r) / inf * (1.0 + 1e-9)
                }
            };
            acc += band.mass * top;
            tops.push(top);
            cum.push(acc);
        }
        Envelope { a, b, tops, cum }
    }

    /// One proposal at pre-jump state `y` under envelope `env`: `(z, v, accepted)`.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R, y: f64, env: &Envelope) -> Result<(f64, f64, bool)> {
        let u = rng.random::<f64>() * env.total();
        let k = env.cum.partition_point(|&c| c <= u).min(self.bands.len() - 1);
        let mag = match &self.bands[k].sizes {
            Sizes::Band(s) => s.sample(rng),
            Sizes::Big(s) => s.sample(rng),
        };
        let z = if rng.random::<bool>() { mag } else { -mag };
        let top = env.tops[k];
        let v = (1.0 - rng.random::<f64>()) * top;
        let r = self.ratio(y, z);
        if r > top {
            return Err(Error::Consistency(format!(
                "ratio {r:.6} at x = {y:.4}, z = {z:.4} exceeds its thinning envelope {top:.6}"
            )));
        }
        Ok((z, v, v <= r))
    }

    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.cfg.init {
            InitLaw::Point { x0 } => x0,
            InitLaw::Stationary => self.law.sample(rng),
        }
    }

    /// Path number `index` of the ensemble.
    pub fn path(&self, index: u64) -> Result<PathRecord> {
        let mut init = rng::stream(self.cfg.seed, Purpose::StationaryInit, index);
        let x0 = self.initial_state(&mut init);
        let mut r = rng::stream(self.cfg.seed, Purpose::GstPath, index);
        self.path_from(x0, &mut r)
    }

    pub fn path_from<R: Rng + ?Sized>(&self, x_start: f64, rng: &mut R) -> Result<PathRecord> {
        let cfg = &self.cfg;
        let n = cfg.steps();
        let k = cfg.window;
        let keep_all = cfg.record == RecordMode::Full;
        let mut states = Vec::with_capacity(n + 1);
        let mut jumps = Vec::new();
        let mut trace = cfg.record_trace.then(|| Vec::with_capacity(n));
        let clock = |rng: &mut R, env: &Envelope, from: f64| -> f64 {
            let rate = env.total();
            if rate > 0.0 {
                from + Exp::new(rate).expect("positive rate").sample(rng)
            } else {
                f64::INFINITY
            }
        };
        let mut x = x_start;
        states.push(x);
        let mut exit_time = (x.abs() > k).then_some(0.0);
        let mut env = self.envelope(x);
        let mut next = clock(rng, &env, 0.0);
        'steps: for i in 0..n {
            if exit_time.is_some() {
                break;
            }
            let t1 = (i + 1) as f64 * cfg.dt;
            let frozen = x;
            let mut y = x;
            while next <= t1 {
                let s = next;
                let (z, v, acc) = self.propose(rng, y, &env)?;
                if acc || keep_all {
                    let x_mark = rng.random::<f64>();
                    jumps.push(JumpRecord { s, z, v, accepted: acc, pre_state: y, x_mark });
                }
                if acc {
                    y += z;
                    if y.abs() > k {
                        exit_time = Some(s);
                        break 'steps;
                    }
                    if !env.contains(y) {
                        env = self.envelope(y);
                        next = clock(rng, &env, s);
                        continue;
                    }
                }
                next = clock(rng, &env, s);
            }
            let xi: f64 = StandardNormal.sample(rng);
            let sd = self.lerp(&self.sd_tab, frozen);
            let b = self.lerp(&self.drift_tab, frozen);
            let c = self.lerp(&self.comp_tab, frozen);
            let g = sd * xi;
            x = y + (b - c) * cfg.dt + g;
            if let Some(tr) = trace.as_mut() {
                tr.push(StepTrace { drift: b, compensator: c, gauss: g });
            }
            states.push(x);
            if x.abs() > k {
                exit_time = Some(t1);
                break;
            }
            if !env.contains(x) {
                env = self.envelope(x);
                next = clock(rng, &env, t1);
            }
        }
        Ok(PathRecord { dt: cfg.dt, horizon: n as f64 * cfg.dt, states, jumps, exit_time, trace })
    }

    /// Map every path of the ensemble through `f`, in parallel, returning results in path order.
    pub fn map_paths<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, PathRecord) -> T + Sync + Send,
    {
        (0..self.cfg.n_paths as u64)
            .into_par_iter()
            .map(|i| self.path(i).map(|p| f(i, p)))
            .collect()
    }
}

/// One path of the ground-state SDE.
pub fn simulate_path(gst: &GstModel, cfg: &SimConfig, index: u64) -> Result<PathRecord> {
    Simulator::new(gst, cfg)?.path(index)
}

/// The whole ensemble in memory. Large runs should use [`Simulator::map_paths`].
pub fn simulate_ensemble(gst: &GstModel, cfg: &SimConfig) -> Result<Vec<PathRecord>> {
    let sim = Simulator::new(gst, cfg)?;
    let paths = sim.map_paths(|_, p| p)?;
    let exited = paths.iter().filter(|p| p.exited()).count();
    if !paths.is_empty() && exited as f64 > 0.2 * paths.len() as f64 {
        log::warn!("{exited} of {} paths left the window |x| ≤ {}; raise the window", paths.len(), cfg.window);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gst::fixtures;
    use crate::sim::checks::{acceptance_mismatches, exit_fraction, reconstruction_error};

    fn cfg(t: f64, dt: f64, k: f64, n: usize) -> SimConfig {
        SimConfig::new(t, dt, 0.05, k, 17, n)
    }

    #[test]
    fn brownian_steps_are_drift_plus_gaussian() {
        let g = fixtures::harmonic();
        let mut c = cfg(1.0, 1e-3, 6.0, 1);
        c.record_trace = true;
        c.init = InitLaw::Point { x0: 0.7 };
        let p = simulate_path(&g, &c, 0).unwrap();
        assert!(p.jumps.is_empty());
        assert_eq!(p.states[0], 0.7);
        let tr = p.trace.as_ref().unwrap();
        for i in 0..tr.len() {
            // the drift table interpolates −x linearly between nodes
            assert!((tr[i].drift - g.drift(p.states[i]).unwrap()).abs() < 1e-6);
            assert_eq!(tr[i].compensator, 0.0);
            let want = p.states[i] + tr[i].drift * c.dt + tr[i].gauss;
            assert_eq!(p.states[i + 1], want);
        }
        // Gaussian parts have variance σ² dt
        let g2: Vec<f64> = tr.iter().map(|s| s.gauss / c.dt.sqrt()).collect();
        let v = crate::stats::variance(&g2);
        assert!((v - 1.0).abs() < 3.0 * (2.0 / g2.len() as f64).sqrt(), "{v}");
    }

    #[test]
    fn stable_paths_reconstruct_and_reproduce_flags() {
        let g = fixtures::stable_quartic();
        let mut c = cfg(1.0, 1e-3, 8.0, 8);
        c.record_trace = true;
        let sim = Simulator::new(&g, &c).unwrap();
        let mut rejected = 0;
        for i in 0..8 {
            let p = sim.path(i).unwrap();
            assert!(reconstruction_error(&p).unwrap() < 1e-12);
            assert_eq!(acceptance_mismatches(&sim, &p), 0);
            assert!(p.jumps.windows(2).all(|w| w[0].s <= w[1].s));
            rejected += p.jumps.iter().filter(|j| !j.accepted).count();
        }
        assert!(rejected > 0, "full record mode keeps rejected proposals");
    }

    #[test]
    fn deterministic_whatever_the_order() {
        let g = fixtures::stable_quartic();
        let c = cfg(0.5, 5e-4, 8.0, 12);
        let a = simulate_ensemble(&g, &c).unwrap();
        let sim = Simulator::new(&g, &c).unwrap();
        let b: Vec<PathRecord> = (0..12).rev().map(|i| sim.path(i).unwrap()).collect();
        for (i, p) in a.iter().enumerate() {
            assert_eq!(p, &b[11 - i]);
        }
        assert_ne!(a[0].states, a[1].states);
    }

    #[test]
    fn empty_ensemble() {
        let g = fixtures::harmonic();
        assert!(simulate_ensemble(&g, &cfg(1.0, 1e-3, 6.0, 0)).unwrap().is_empty());
    }

    #[test]
    fn config_is_checked_against_the_model() {
        let g = fixtures::stable_quartic();
        assert!(Simulator::new(&g, &cfg(1.0, 2.0, 8.0, 1)).is_err());
        assert!(Simulator::new(&g, &cfg(1.0, 1e-2, 8.0, 1)).is_err());
        assert!(Simulator::new(&g, &cfg(1.0, 1e-3, 15.5, 1)).is_err());
        assert!(Simulator::new(&g, &SimConfig::new(1.0, 1e-3, 0.1, 8.0, 1, 1)).is_err());
        let mut c = cfg(1.0, 1e-3, 8.0, 1);
        c.init = InitLaw::Point { x0: 9.0 };
        assert!(Simulator::new(&g, &c).is_err());
    }

    #[test]
    fn exit_fraction_falls_with_the_window() {
        let g = fixtures::stable_quartic();
        let mut last = 1.0;
        for k in [0.5, 1.0, 2.0] {
            let mut c = cfg(1.0, 1e-3, k, 400);
            c.init = InitLaw::Point { x0: 0.0 };
            c.record = RecordMode::AcceptedOnly;
            let e = exit_fraction(&simulate_ensemble(&g, &c).unwrap());
            assert!(e <= last, "K {k}: {e} > {last}");
            last = e;
        }
        assert!(last < 1.0);
    }

    #[test]
    fn unit_kernel_has_unit_envelopes() {
        let g = fixtures::stable_quartic();
        let sim = Simulator::with_kernel(&g, &cfg(1.0, 1e-3, 8.0, 1), Kernel::Unit).unwrap();
        let env = sim.envelope(3.0);
        assert!(env.tops.iter().all(|&t| t == 1.0));
        let total: f64 = sim.bands.iter().map(|b| b.mass).sum();
        assert!((env.total() - total).abs() < 1e-12 * total);
    }
}
