//! Exact samplers for jump magnitudes with density proportional to ν.

use rand::Rng;

use super::density::LevyDensity;

/// Draw from `z^{-p}` on `[a, b]` by inversion.
#[inline]
pub(crate) fn power_law<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64, p: f64) -> f64 {
    let u: f64 = rng.random();
    if (p - 1.0).abs() < 1e-12 {
        a * (b / a).powf(u)
    } else {
        let q = 1.0 - p;
        let (aq, bq) = (a.powf(q), b.powf(q));
        (aq + u * (bq - aq)).powf(1.0 / q).clamp(a, b)
    }
}

fn power_law_mass(a: f64, b: f64, p: f64) -> f64 {
    if (p - 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        let q = 1.0 - p;
        (b.powf(q) - a.powf(q)) / q
    }
}

const MAX_CELL_POWER: f64 = 8.0;

#[derive(Debug, Clone)]
struct Cell {
    a: f64,
    b: f64,
    /// Envelope `coef * z^{-p}` dominating ν on the cell.
    p: f64,
    coef: f64,
}

/// Rejection sampler for `|z|` on `(lo, hi]` with density `∝ ν`.
///
/// The range is cut into geometric cells; each carries a power-law envelope
/// through its endpoint values, inflated to dominate ν on a fine probe grid.
#[derive(Debug, Clone)]
pub struct BandSampler {
    density: LevyDensity,
    cells: Vec<Cell>,
    cum: Vec<f64>,
}

impl BandSampler {
    pub fn new(density: &LevyDensity, lo: f64, hi: f64) -> Self {
        let hi = hi.min(density.support_end());
        let mut cuts = vec![lo];
        let ratio = 2f64.powf(0.25);
        let mut x = lo;
        while x * ratio < hi {
            x *= ratio;
            cuts.push(x);
        }
        cuts.extend(density.breakpoints().into_iter().filter(|&p| p > lo && p < hi));
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut cells = Vec::new();
        let mut cum = Vec::new();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (density.at(a), density.at(b));
            let p = if fa > 0.0 && fb > 0.0 { (fa / fb).ln() / (b / a).ln() } else { 0.0 };
            // Near a taper the endpoint slope is huge and the envelope misses the
            // interior by orders of magnitude; a flat one is tighter there.
            let p = if p.is_finite() && p.abs() <= MAX_CELL_POWER { p } else { 0.0 };
            let base = if fa > 0.0 && fb > 0.0 { fa * a.powf(p) } else { 1.0 };
            let mut worst: f64 = 0.0;
            for k in 0..=64 {
                let z = a * (b / a).powf(k as f64 / 64.0);
                worst = worst.max(density.at(z) / (base * z.powf(-p)));
            }
            if worst == 0.0 {
                continue;
            }
            let coef = base * worst * (1.0 + 1e-3);
            total += coef * power_law_mass(a, b, p);
            cells.push(Cell { a, b, p, coef });
            cum.push(total);
        }
        Self { density: density.clone(), cells, cum }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Magnitude in the band; the caller attaches a random sign.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cum.last().expect("non-empty sampler");
        loop {
            let u: f64 = rng.random::<f64>() * total;
            let k = self.cum.partition_point(|&c| c < u).min(self.cells.len() - 1);
            let c = &self.cells[k];
            let z = power_law(rng, c.a, c.b, c.p);
            let accept: f64 = rng.random();
            if accept * c.coef * z.powf(-c.p) <= self.density.at(z) {
                return z;
            }
        }
    }
}

/// Sampler for magnitudes above 1.
#[derive(Debug, Clone)]
pub enum BigJumpSampler {
    None,
    Pareto { alpha: f64 },
    TemperedPareto { alpha: f64, tempering: f64 },
    Band(BandSampler),
}

impl BigJumpSampler {
    pub fn new(density: &LevyDensity) -> Self {
        match density {
            LevyDensity::Stable { alpha, .. } => BigJumpSampler::Pareto { alpha: *alpha },
            LevyDensity::Tempered { alpha, tempering, .. } => {
                BigJumpSampler::TemperedPareto { alpha: *alpha, tempering: *tempering }
            }
            d if d.support_end() > 1.0 => BigJumpSampler::Band(BandSampler::new(d, 1.0, d.support_end())),
            _ => BigJumpSampler::None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            BigJumpSampler::None => panic!("no jumps above 1 for this density"),
            BigJumpSampler::Pareto { alpha } => {
                let u: f64 = 1.0 - rng.random::<f64>();
                u.powf(-1.0 / alpha)
            }
            BigJumpSampler::TemperedPareto { alpha, tempering } => loop {
                let u: f64 = 1.0 - rng.random::<f64>();
                let z = u.powf(-1.0 / alpha);
                if rng.random::<f64>() <= (-tempering * (z - 1.0)).exp() {
                    return z;
                }
            },
            BigJumpSampler::Band(b) => b.sample(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Empirical band frequencies against band masses from quadrature.
    fn check(d: LevyDensity, lo: f64, hi: f64) {
        let m = LevyModel::new(0.0, d.clone()).unwrap();
        let s = BandSampler::new(&d, lo, hi);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let edges: Vec<f64> = (0..=10).map(|k| lo * (hi / lo).powf(k as f64 / 10.0)).collect();
        let mut counts = [0usize; 10];
        for _ in 0..n {
            let z = s.sample(&mut rng);
            assert!(z >= lo && z <= hi);
            let k = edges.partition_point(|&e| e < z).clamp(1, 10) - 1;
            counts[k] += 1;
        }
        let total = m.integrate_nu(lo, hi, |_| 1.0).unwrap();
        for k in 0..10 {
            let p = m.integrate_nu(edges[k], edges[k + 1], |_| 1.0).unwrap() / total;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let f = counts[k] as f64 / n as f64;
            assert!((f - p).abs() < 5.0 * se + 1e-12, "{} bin {k}: {f} vs {p}", d.label());
        }
    }

    #[test]
    fn band_sampler_follows_density() {
        check(LevyDensity::stable(1.5, 1.0), 1e-3, 1.0);
        check(LevyDensity::log_perturbed(2.0), 1e-2, 1.0);
        check(LevyDensity::Tempered { alpha: 0.8, scale: 1.0, tempering: 5.0 }, 0.01, 1.0);
    }

    #[test]
    fn pareto_tail_is_exact() {
        let s = BigJumpSampler::new(&LevyDensity::stable(1.2, 3.0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let above2 = (0..n).filter(|_| s.sample(&mut rng) > 2.0).count() as f64 / n as f64;
        let p = 2f64.powf(-1.2);
        assert!((above2 - p).abs() < 5.0 * (p * (1.0 - p) / n as f64).sqrt());
    }
}
