use rand::Rng;

use crate::spectral::GroundState;

/// The grid law with mass `φ₀(x_i)² h` spread uniformly over `[x_i − h/2, x_i + h/2]`.
#[derive(Debug, Clone)]
pub struct GridLaw {
    x0: f64,
    h: f64,
    /// Cumulative mass at the right edge of each cell, normalized to 1.
    cum: Vec<f64>,
}

impl GridLaw {
    pub fn from_ground_state(gs: &GroundState) -> Self {
        let h = gs.grid.spacing();
        let mut cum = Vec::with_capacity(gs.phi.len());
        let mut s = 0.0;
        for p in &gs.phi {
            s += p * p * h;
            cum.push(s);
        }
        for c in cum.iter_mut() {
            *c /= s;
        }
        Self { x0: -gs.grid.half_width - 0.5 * h, h, cum }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self.cum.partition_point(|&c| c < u).min(self.cum.len() - 1);
        let lo = if k == 0 { 0.0 } else { self.cum[k - 1] };
        let w = self.cum[k] - lo;
        let t = if w > 0.0 { (u - lo) / w } else { 0.5 };
        self.x0 + (k as f64 + t) * self.h
    }

    /// Piecewise-linear CDF matching `sample`.
    pub fn cdf(&self, x: f64) -> f64 {
        let p = (x - self.x0) / self.h;
        if p <= 0.0 {
            return 0.0;
        }
        let k = p.floor() as usize;
        if k >= self.cum.len() {
            return 1.0;
        }
        let lo = if k == 0 { 0.0 } else { self.cum[k - 1] };
        lo + (self.cum[k] - lo) * (p - k as f64)
    }

    pub fn mean(&self) -> f64 {
        let mut m = 0.0;
        let mut lo = 0.0;
        for (k, &c) in self.cum.iter().enumerate() {
            m += (c - lo) * (self.x0 + (k as f64 + 0.5) * self.h);
            lo = c;
        }
        m
    }
}

/// One draw from the stationary law `φ₀² dx` on the grid.
pub fn sample_stationary_init<R: Rng + ?Sized>(gs: &GroundState, rng: &mut R) -> f64 {
    GridLaw::from_ground_state(gs).sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gst::fixtures;
    use crate::rng::{stream, Purpose};
    use crate::stats;

    #[test]
    fn harmonic_stationary_law() {
        let g = fixtures::harmonic();
        let law = GridLaw::from_ground_state(&g.gs);
        let mut r = stream(3, Purpose::StationaryInit, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| law.sample(&mut r)).collect();
        let (m, se) = stats::mean_se(&xs);
        assert!(m.abs() < 3.0 * se, "mean {m} se {se}");
        // variance of a normal sample variance ≈ 2σ⁴/n, plus the cell-uniform spread h²/12
        let v = stats::variance(&xs);
        let h = g.gs.grid.spacing();
        let want = 0.5 + h * h / 12.0;
        assert!((v - want).abs() < 3.0 * (2.0 * 0.25 / n as f64).sqrt(), "var {v}");
        let ks = stats::ks_statistic(&xs, |x| law.cdf(x));
        assert!(ks < 1.63 / (n as f64).sqrt(), "ks {ks}");
        assert!(law.mean().abs() < 1e-10);
    }

    #[test]
    fn cdf_is_monotone_and_bounded() {
        let g = fixtures::stable_quartic();
        let law = GridLaw::from_ground_state(&g.gs);
        let mut last = 0.0;
        for k in -200..=200 {
            let c = law.cdf(k as f64 * 0.1);
            assert!((0.0..=1.0).contains(&c) && c >= last);
            last = c;
        }
        assert_eq!(law.cdf(-1e3), 0.0);
        assert_eq!(law.cdf(1e3), 1.0);
        let mut r = stream(1, Purpose::StationaryInit, 0);
        let x = sample_stationary_init(&g.gs, &mut r);
        assert!(x.abs() <= g.gs.grid.half_width + g.gs.grid.spacing());
    }
}
