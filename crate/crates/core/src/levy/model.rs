use serde::{Deserialize, Serialize};

use super::density::LevyDensity;
use crate::error::{Error, Result};
use crate::quadrature::{self, GaussRule};

/// Symmetric Lévy triplet `(0, σ²/2, ν)` in one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyModel {
    #[serde(default = "one")]
    pub dimension: usize,
    pub sigma: f64,
    pub density: LevyDensity,
}

fn one() -> usize {
    1
}

/// Outcome of a small-jump moment computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Divergent,
}

impl Moment {
    pub fn value(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Divergent => None,
        }
    }
}

/// Numbers of dyadic bands probed by the numeric index detector.
const BG_BANDS: usize = 150;
/// Bands summed directly before the geometric tail extrapolation.
const MOMENT_BANDS: usize = 60;
/// Below this value of `|y| z` the symbol integrand is replaced by its Taylor term.
const TAYLOR_SWITCH: f64 = 1e-4;

impl LevyModel {
    pub fn new(sigma: f64, density: LevyDensity) -> Result<Self> {
        let m = Self { dimension: 1, sigma, density };
        m.validate()?;
        Ok(m)
    }

    pub fn brownian(sigma: f64) -> Self {
        Self { dimension: 1, sigma, density: LevyDensity::Zero }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 1 {
            return Err(Error::Config(format!("only dimension 1 is supported, got {}", self.dimension)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        self.density.validate()?;
        if self.sigma == 0.0 && self.density.is_zero() {
            return Err(Error::Config("model has neither diffusion nor jumps".into()));
        }
        Ok(())
    }

    pub fn nu(&self, z: f64) -> Result<f64> {
        self.density.eval(z)
    }

    /// `∫_a^b g(z) ν(z) dz` for `0 < a < b`, split into pieces on which ν is smooth.
    pub fn integrate_nu<G: Fn(f64) -> f64>(&self, a: f64, b: f64, g: G) -> Result<f64> {
        if self.density.is_zero() || b <= a {
            return Ok(0.0);
        }
        let b = b.min(self.density.support_end());
        if b <= a {
            return Ok(0.0);
        }
        let mut cuts = vec![a];
        let mut x = a;
        while x * 2.0 < b {
            x *= 2.0;
            cuts.push(x);
        }
        cuts.extend(self.density.breakpoints().into_iter().filter(|&p| p > a && p < b));
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += quadrature::integrate(|z| g(z) * self.density.at(z), w[0], w[1], 1e-300, 1e-12)?;
        }
        Ok(total)
    }

    /// One-sided `∫_0^eps z² ν`.
    pub fn second_moment_one_sided(&self, eps: f64) -> Result<f64> {
        if let Some(v) = self.density.second_moment_closed(eps) {
            return Ok(v);
        }
        let anchor = match &self.density {
            LevyDensity::LogPerturbed { .. } => super::density::LOGPERT_TAPER_START,
            LevyDensity::Tabulated { z, .. } => z[0],
            _ => unreachable!("closed form exists"),
        };
        let base = self.density.second_moment_closed(anchor).expect("closed at anchor");
        Ok(base + self.integrate_nu(anchor, eps, |z| z * z)?)
    }

    /// Two-sided `∫_{|z|≤eps} z² ν`.
    pub fn second_moment(&self, eps: f64) -> Result<f64> {
        Ok(2.0 * self.second_moment_one_sided(eps)?)
    }

    /// One-sided `∫_u^∞ ν`.
    pub fn tail_mass_one_sided(&self, u: f64) -> Result<f64> {
        if let Some(v) = self.density.tail_mass_closed(u) {
            return Ok(v);
        }
        let end = match &self.density {
            LevyDensity::Tempered { tempering, .. } => (2.0 * u).max(u + 60.0 / tempering),
            d => d.support_end(),
        };
        self.integrate_nu(u, end, |_| 1.0)
    }

    /// Two-sided mass of `{|z| > u}`.
    pub fn tail_mass(&self, u: f64) -> Result<f64> {
        Ok(2.0 * self.tail_mass_one_sided(u)?)
    }

    /// `ψ(y) = σ²y²/2 + ∫(1 − cos yz) ν(dz)`.
    pub fn char_exponent(&self, y: f64) -> Result<f64> {
        let y = y.abs();
        if y == 0.0 {
            return Ok(0.0);
        }
        let gauss = 0.5 * self.sigma * self.sigma * y * y;
        if self.density.is_zero() {
            return Ok(gauss);
        }
        // |z| ≤ 1 on dyadic bands, in the cancellation-free form 2 sin²(yz/2)
        let mut small = 0.0;
        let mut top = 1.0f64;
        while y * top >= TAYLOR_SWITCH {
            let lo = 0.5 * top;
            small += self.integrate_nu(lo, top, |z| {
                let s = (0.5 * y * z).sin();
                2.0 * s * s
            })?;
            top = lo;
        }
        small += 0.5 * y * y * self.second_moment_one_sided(top)?;
        let tail = self.tail_cosine_part(y)?;
        Ok(gauss + 2.0 * (small + tail))
    }

    /// One-sided `∫_1^∞ (1 − cos yz) ν`.
    fn tail_cosine_part(&self, y: f64) -> Result<f64> {
        let end = self.density.support_end();
        if end <= 1.0 {
            return Ok(0.0);
        }
        let period = 2.0 * std::f64::consts::PI / y;
        let osc = |a: f64, b: f64| -> Result<f64> {
            // pieces no longer than half a period keep the rule honest
            let n = ((b - a) / (0.5 * period)).ceil().max(1.0) as usize;
            let mut s = 0.0;
            for k in 0..n {
                let lo = a + (b - a) * k as f64 / n as f64;
                let hi = a + (b - a) * (k + 1) as f64 / n as f64;
                s += self.integrate_nu(lo, hi, |z| 1.0 - (y * z).cos())?;
            }
            Ok(s)
        };
        if end.is_finite() {
            return osc(1.0, end);
        }
        if let LevyDensity::Tempered { tempering, .. } = self.density {
            let z_max = 1.0 + 60.0 / tempering;
            return osc(1.0, z_max);
        }
        // Truncate at Z and close the oscillatory remainder by two integrations by parts.
        let nu = |z: f64| self.density.at(z);
        let d1 = |z: f64| {
            let h = 1e-4 * z;
            (nu(z + h) - nu(z - h)) / (2.0 * h)
        };
        let d2 = |z: f64| {
            let h = 1e-3 * z;
            (nu(z + h) - 2.0 * nu(z) + nu(z - h)) / (h * h)
        };
        let scale = self.tail_mass_one_sided(1.0)?.max(1.0);
        let mut z_end = 2.0f64.max(1.0 + period);
        let mut guard = 0;
        while d2(z_end).abs() / (y * y * y) > 1e-13 * scale || nu(z_end) / y > 1e-6 * scale {
            z_end *= 2.0;
            guard += 1;
            if guard > 60 || (z_end - 1.0) / period > 2e5 {
                return Err(Error::Numerical(format!("symbol tail at y = {y} needs too many panels")));
            }
        }
        let body = osc(1.0, z_end)?;
        let cos_rest = -(y * z_end).sin() * nu(z_end) / y - (y * z_end).cos() * d1(z_end) / (y * y);
        Ok(body + self.tail_mass_one_sided(z_end)? - cos_rest)
    }

    /// Two-sided `C_j = ν(2^{-j-1} < |z| ≤ 2^{-j})`.
    pub fn dyadic_band_mass(&self, j: u32) -> Result<f64> {
        let hi = 0.5f64.powi(j as i32);
        Ok(2.0 * self.integrate_nu(0.5 * hi, hi, |_| 1.0)?)
    }

    /// `ω(u) = ν(u < |z| < 1)`, by adaptive quadrature in `log z` over the
    /// whole range rather than the band decomposition.
    pub fn omega(&self, u: f64) -> Result<f64> {
        if u >= 1.0 || self.density.is_zero() {
            return Ok(0.0);
        }
        let hi = self.density.support_end().min(1.0);
        if u >= hi {
            return Ok(0.0);
        }
        let mut cuts = vec![u.ln()];
        cuts.extend(self.density.breakpoints().into_iter().filter(|&p| p > u && p < hi).map(f64::ln));
        cuts.push(hi.ln());
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += quadrature::integrate(
                |s| {
                    let z = s.exp();
                    self.density.at(z) * z
                },
                w[0],
                w[1],
                1e-300,
                1e-13,
            )?;
        }
        Ok(2.0 * total)
    }

    pub fn band_mass_table(&self, j_max: u32) -> Result<BandMassTable> {
        let mut c = Vec::with_capacity(j_max as usize + 1);
        let mut omega = Vec::with_capacity(j_max as usize + 1);
        for j in 0..=j_max {
            c.push(self.dyadic_band_mass(j)?);
            omega.push(self.omega(0.5f64.powi(j as i32 + 1))?);
        }
        Ok(BandMassTable { c, omega })
    }

    /// Two-sided `∫_{|z|≤eps} |z|^γ ν`, summed over dyadic bands of `(0, eps]`.
    pub fn small_jump_moment(&self, gamma: f64, eps: f64) -> Result<Moment> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Domain(format!("cut-off must lie in (0, 1], got {eps}")));
        }
        if gamma < 0.0 {
            return Err(Error::Domain(format!("moment order must be non-negative, got {gamma}")));
        }
        if self.density.is_zero() {
            return Ok(Moment::Finite(0.0));
        }
        if gamma == 2.0 {
            return Ok(Moment::Finite(self.second_moment(eps)?));
        }
        let rule = GaussRule::new(24);
        let mut sum = 0.0;
        let mut last = [0.0f64; 2];
        let mut top = eps;
        for _ in 0..MOMENT_BANDS {
            let lo = 0.5 * top;
            let t = 2.0 * band_rule(&rule, &self.density, lo, top, gamma);
            if !t.is_finite() {
                return Ok(Moment::Divergent);
            }
            sum += t;
            last = [last[1], t];
            top = lo;
        }
        let q = last[1] / last[0];
        if !(q < 1.0 - 1e-9) {
            return Ok(Moment::Divergent);
        }
        Ok(Moment::Finite(sum + last[1] * q / (1.0 - q)))
    }

    /// Upper Blumenthal–Getoor index.
    pub fn bg_index(&self, mode: BgMode) -> Result<f64> {
        match mode {
            BgMode::Analytic => Ok(self.density.bg_index_analytic()),
            BgMode::Numeric => self.bg_index_numeric(),
        }
    }

    fn bg_index_numeric(&self) -> Result<f64> {
        if self.density.is_zero() {
            return Ok(0.0);
        }
        if let LevyDensity::Tabulated { z, .. } = &self.density {
            if z[0] > 1e-3 {
                return Err(Error::Precision(format!(
                    "tabulated density starts at {:.3e}; need samples below 1e-3 to resolve the index",
                    z[0]
                )));
            }
        }
        let rule = GaussRule::new(16);
        // band terms T_j(γ) = ∫_band z^γ ν; the moment is finite iff log T_j decreases on deep bands
        let diverges = |gamma: f64| -> bool {
            let lo_j = BG_BANDS / 2;
            let pts: Vec<(f64, f64)> = (lo_j..=BG_BANDS)
                .map(|j| {
                    let hi = 0.5f64.powi(j as i32);
                    (j as f64, band_rule(&rule, &self.density, 0.5 * hi, hi, gamma).ln())
                })
                .collect();
            crate::stats::ols_slope(&pts).map(|s| s >= 0.0).unwrap_or(true)
        };
        let (mut lo, mut hi) = (0.0f64, 2.0f64);
        if !diverges(lo) {
            return Ok(0.0);
        }
        if diverges(hi) {
            return Ok(2.0);
        }
        while hi - lo > 0.01 {
            let mid = 0.5 * (lo + hi);
            if diverges(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BgMode {
    Analytic,
    Numeric,
}

/// Fixed Gauss rule for `∫_a^b z^γ ν` on a band where ν is smooth.
fn band_rule(rule: &GaussRule, d: &LevyDensity, a: f64, b: f64, gamma: f64) -> f64 {
    // log-spaced substitution keeps the rule exact-ish for power laws
    let (la, lb) = (a.ln(), b.ln());
    rule.integrate(la, lb, |s| {
        let z = s.exp();
        z.powf(gamma) * d.at(z) * z
    })
}

/// Dyadic band masses and cumulative tails, `omega[j] = ω(2^{-j-1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandMassTable {
    pub c: Vec<f64>,
    pub omega: Vec<f64>,
}

impl BandMassTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,C_j,omega_j\n");
        for (j, (c, w)) in self.c.iter().zip(&self.omega).enumerate() {
            s.push_str(&format!("{j},{c:.12e},{w:.12e}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    /// ∫_ℝ (1 − cos yz) |z|^{-1-α} dz in closed form.
    fn stable_symbol(alpha: f64, y: f64) -> f64 {
        if (alpha - 1.0).abs() < 1e-14 {
            std::f64::consts::PI * y.abs()
        } else {
            2.0 * y.abs().powf(alpha) * gamma(1.0 - alpha) * (std::f64::consts::PI * alpha / 2.0).cos() / alpha
        }
    }

    fn stable(alpha: f64, c: f64) -> LevyModel {
        LevyModel::new(0.0, LevyDensity::stable(alpha, c)).unwrap()
    }

    #[test]
    fn symbol_of_cauchy_with_unit_constant() {
        let m = stable(1.0, 1.0 / std::f64::consts::PI);
        assert!((m.char_exponent(1.0).unwrap() - 1.0).abs() < 1e-8);
        assert_eq!(m.char_exponent(0.0).unwrap(), 0.0);
        let b = LevyModel::brownian(1.0);
        assert_eq!(b.char_exponent(2.0).unwrap(), 2.0);
    }

    #[test]
    fn symbol_matches_stable_closed_form() {
        for alpha in [0.6, 0.8, 1.0, 1.2, 1.5, 1.9] {
            let m = stable(alpha, 1.0);
            for y in [0.01, 0.3, 1.0, 7.0, 150.0] {
                let got = m.char_exponent(y).unwrap();
                let want = stable_symbol(alpha, y);
                assert!((got - want).abs() < 1e-7 * want, "alpha {alpha} y {y}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn symbol_of_tempered_is_below_stable() {
        let t = LevyModel::new(0.0, LevyDensity::Tempered { alpha: 1.5, scale: 1.0, tempering: 1.0 }).unwrap();
        for y in [0.5, 2.0, 20.0] {
            let v = t.char_exponent(y).unwrap();
            assert!(v > 0.0 && v < stable_symbol(1.5, y));
        }
    }

    #[test]
    fn band_mass_examples() {
        let m = stable(1.0, 1.0);
        assert!((m.dyadic_band_mass(0).unwrap() - 2.0).abs() < 1e-12);
        let m = stable(1.5, 1.0);
        let r = m.dyadic_band_mass(7).unwrap() / m.dyadic_band_mass(6).unwrap();
        assert!((r - 2f64.powf(1.5)).abs() < 1e-10);
        assert_eq!(LevyModel::brownian(1.0).dyadic_band_mass(3).unwrap(), 0.0);
    }

    #[test]
    fn band_masses_add_up_to_omega() {
        for d in [LevyDensity::stable(1.5, 1.0), LevyDensity::log_perturbed(2.0), LevyDensity::Tempered {
            alpha: 0.8,
            scale: 2.0,
            tempering: 3.0,
        }] {
            let m = LevyModel::new(0.0, d).unwrap();
            let t = m.band_mass_table(20).unwrap();
            let mut acc = 0.0;
            for j in 0..=20 {
                acc += t.c[j];
                assert!((acc - t.omega[j]).abs() <= 1e-8 * t.omega[j], "{} j={j}", m.density.label());
                if j > 0 {
                    assert!(t.omega[j] >= t.omega[j - 1]);
                }
            }
        }
    }

    #[test]
    fn small_jump_moment_examples() {
        let m = stable(1.5, 1.0);
        assert!((m.small_jump_moment(2.0, 1.0).unwrap().value().unwrap() - 4.0).abs() < 1e-10);
        // γ = 1.8 through the band route: 2/(1.8 - 1.5)
        let v = m.small_jump_moment(1.8, 1.0).unwrap().value().unwrap();
        assert!((v - 2.0 / 0.3).abs() < 1e-6 * v, "{v}");
        assert_eq!(m.small_jump_moment(1.0, 1.0).unwrap(), Moment::Divergent);
        let mut prev = f64::INFINITY;
        for eps in [1.0, 0.1, 0.01, 0.001] {
            let v = m.small_jump_moment(2.0, eps).unwrap().value().unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn bg_index_numeric_matches_analytic() {
        for alpha in [0.6, 0.8, 1.0, 1.2, 1.5, 1.9] {
            let m = stable(alpha, 1.0);
            let est = m.bg_index(BgMode::Numeric).unwrap();
            assert!((est - alpha).abs() < 0.02, "{alpha}: {est}");
            assert_eq!(m.bg_index(BgMode::Analytic).unwrap(), alpha);
        }
        let l = LevyModel::new(0.0, LevyDensity::log_perturbed(2.0)).unwrap();
        assert_eq!(l.bg_index(BgMode::Analytic).unwrap(), 2.0);
        let est = l.bg_index(BgMode::Numeric).unwrap();
        assert!((est - 2.0).abs() < 0.1, "{est}");
        assert_eq!(LevyModel::brownian(1.0).bg_index(BgMode::Numeric).unwrap(), 0.0);
    }

    #[test]
    fn coarse_tabulated_density_cannot_resolve_index() {
        let pts: Vec<(f64, f64)> = (0..10).map(|k| (0.1 + 0.1 * k as f64, 1.0 / (0.1 + 0.1 * k as f64))).collect();
        let m = LevyModel::new(0.0, LevyDensity::tabulated(&pts).unwrap()).unwrap();
        assert!(matches!(m.bg_index(BgMode::Numeric), Err(Error::Precision(_))));
    }
}
