use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::model::LevyModel;
use super::sampler::{BandSampler, BigJumpSampler};
use crate::error::{Error, Result};
use crate::path::{JumpRecord, PathRecord, StepTrace};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub struct LevyPathConfig {
    pub horizon: f64,
    pub dt: f64,
    /// Jumps below this size are replaced by a matching-variance Gaussian.
    pub eps_small: f64,
    pub x0: f64,
    pub record_trace: bool,
}

impl LevyPathConfig {
    pub fn new(horizon: f64, dt: f64, eps_small: f64) -> Self {
        Self { horizon, dt, eps_small, x0: 0.0, record_trace: false }
    }
}

/// Precomputed rates and samplers for paths of the underlying Lévy process.
#[derive(Debug, Clone)]
pub struct LevyPathSampler {
    cfg: LevyPathConfig,
    gauss_sd: f64,
    rate_small: f64,
    rate_big: f64,
    small: Option<BandSampler>,
    big: BigJumpSampler,
}

impl LevyPathSampler {
    pub fn new(model: &LevyModel, cfg: &LevyPathConfig) -> Result<Self> {
        if !(cfg.dt > 0.0) || !(cfg.horizon >= 0.0) {
            return Err(Error::Config(format!("need dt > 0 and T ≥ 0, got dt={} T={}", cfg.dt, cfg.horizon)));
        }
        if !(cfg.eps_small > 0.0 && cfg.eps_small <= 1.0) {
            return Err(Error::Config(format!("small-jump cut-off must lie in (0, 1], got {}", cfg.eps_small)));
        }
        if cfg.eps_small > 0.1 && !model.density.is_zero() {
            log::warn!(
                "small-jump cut-off {} leaves little resolved jump structure for path-regularity estimates",
                cfg.eps_small
            );
        }
        let m2 = model.second_moment(cfg.eps_small)?;
        let gauss_sd = ((model.sigma * model.sigma + m2) * cfg.dt).sqrt();
        let rate_small = model.omega(cfg.eps_small)?;
        let rate_big = model.tail_mass(1.0)?;
        let small = (rate_small > 0.0).then(|| BandSampler::new(&model.density, cfg.eps_small, 1.0));
        Ok(Self { cfg: cfg.clone(), gauss_sd, rate_small, rate_big, small, big: BigJumpSampler::new(&model.density) })
    }

    pub fn path(&self, seed: u64, index: u64) -> PathRecord {
        let mut r = rng::stream(seed, Purpose::LevyPath, index);
        self.path_with(&mut r)
    }

    pub fn path_with<R: Rng + ?Sized>(&self, rng: &mut R) -> PathRecord {
        let cfg = &self.cfg;
        let n = (cfg.horizon / cfg.dt).round() as usize;
        let mut states = Vec::with_capacity(n + 1);
        let mut jumps = Vec::new();
        let mut trace = cfg.record_trace.then(|| Vec::with_capacity(n));
        let total_rate = self.rate_small + self.rate_big;
        let clock = (total_rate > 0.0).then(|| Exp::new(total_rate).expect("positive rate"));
        let mut next_jump = match &clock {
            Some(c) => c.sample(rng),
            None => f64::INFINITY,
        };
        let mut x = cfg.x0;
        states.push(x);
        for i in 0..n {
            let t1 = (i + 1) as f64 * cfg.dt;
            let mut y = x;
            while next_jump <= t1 {
                let small = rng.random::<f64>() * total_rate < self.rate_small;
                let mag = if small {
                    self.small.as_ref().expect("small band present").sample(rng)
                } else {
                    self.big.sample(rng)
                };
                let z = if rng.random::<bool>() { mag } else { -mag };
                let v = 1.0 - rng.random::<f64>();
                let x_mark = rng.random::<f64>();
                jumps.push(JumpRecord { s: next_jump, z, v, accepted: true, pre_state: y, x_mark });
                y += z;
                next_jump += clock.as_ref().expect("clock").sample(rng);
            }
            let xi: f64 = StandardNormal.sample(rng);
            let g = self.gauss_sd * xi;
            if let Some(tr) = trace.as_mut() {
                tr.push(StepTrace { drift: 0.0, compensator: 0.0, gauss: g });
            }
            x = y + g;
            states.push(x);
        }
        PathRecord { dt: cfg.dt, horizon: n as f64 * cfg.dt, states, jumps, exit_time: None, trace }
    }
}

/// One path of the Lévy process `X` on `[0, T]`.
pub fn sample_levy_path(model: &LevyModel, cfg: &LevyPathConfig, seed: u64, index: u64) -> Result<PathRecord> {
    Ok(LevyPathSampler::new(model, cfg)?.path(seed, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyDensity;
    use crate::stats;

    #[test]
    fn brownian_variance_at_one() {
        let m = LevyModel::brownian(1.0);
        let s = LevyPathSampler::new(&m, &LevyPathConfig::new(1.0, 0.01, 1e-3)).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|i| s.path(11, i).final_state()).collect();
        let v = stats::variance(&xs);
        // SE of a normal sample variance ≈ sqrt(2/n)
        assert!((v - 1.0).abs() < 3.0 * (2.0f64 / 1e4).sqrt(), "{v}");
    }

    #[test]
    fn zero_horizon_is_a_single_point() {
        let m = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0)).unwrap();
        let p = sample_levy_path(&m, &LevyPathConfig::new(0.0, 0.01, 1e-3), 1, 0).unwrap();
        assert_eq!(p.states, vec![0.0]);
        assert!(p.jumps.is_empty());
    }

    #[test]
    fn stable_characteristic_function() {
        let m = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0)).unwrap();
        let s = LevyPathSampler::new(&m, &LevyPathConfig::new(1.0, 0.05, 1e-2)).unwrap();
        let n = 8000;
        let xs: Vec<f64> = (0..n).map(|i| s.path(5, i).final_state()).collect();
        for y in [0.5, 1.0, 2.0] {
            let re = xs.iter().map(|x| (y * x).cos()).sum::<f64>() / n as f64;
            let im = xs.iter().map(|x| (y * x).sin()).sum::<f64>() / n as f64;
            let want = (-m.char_exponent(y).unwrap()).exp();
            let err = ((re - want).powi(2) + im * im).sqrt();
            assert!(err < 4.0 / (n as f64).sqrt(), "y {y}: {re} vs {want}");
        }
    }

    #[test]
    fn jump_counts_above_dyadic_sizes() {
        let m = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0)).unwrap();
        let s = LevyPathSampler::new(&m, &LevyPathConfig::new(1.0, 1e-3, 1e-3)).unwrap();
        let n_paths = 200;
        for j in [2, 5, 8] {
            let u = 0.5f64.powi(j);
            let omega = m.omega(u).unwrap();
            let mean = (0..n_paths)
                .map(|i| s.path(7, i).jumps.iter().filter(|r| r.z.abs() > u && r.z.abs() <= 1.0).count() as f64)
                .sum::<f64>()
                / n_paths as f64;
            assert!((mean - omega).abs() < 3.0 * (omega / n_paths as f64).sqrt(), "j {j}: {mean} vs {omega}");
        }
    }
}
