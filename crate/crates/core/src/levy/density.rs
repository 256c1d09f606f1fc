//! Symmetric Lévy densities on the real line.
//!
//! Every variant is stored by its values on the positive half-line; the
//! negative half is the mirror image, so symmetry holds by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower edge of the smooth cut-off applied to the log-perturbed density.
pub const LOGPERT_TAPER_START: f64 = 0.25;
/// The log-perturbed density vanishes from here on.
pub const LOGPERT_SUPPORT_END: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LevyDensity {
    /// No jumps at all.
    Zero,
    /// `c |z|^{-1-alpha}`.
    Stable { alpha: f64, scale: f64 },
    /// `1 / (|z|^3 |log|z||^a)` near the origin, tapered to zero on [1/4, 1/2].
    LogPerturbed { log_power: f64 },
    /// `c e^{-lambda |z|} |z|^{-1-alpha}`.
    Tempered { alpha: f64, scale: f64, tempering: f64 },
    /// Positive-axis samples, log-log interpolated, power-law extrapolated
    /// towards the origin and zero beyond the last sample.
    Tabulated { z: Vec<f64>, density: Vec<f64> },
}

/// Quintic smoothstep: 0 at t=0, 1 at t=1, first and second derivatives vanish at both ends.
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

impl LevyDensity {
    pub fn stable(alpha: f64, scale: f64) -> Self {
        LevyDensity::Stable { alpha, scale }
    }

    pub fn log_perturbed(log_power: f64) -> Self {
        LevyDensity::LogPerturbed { log_power }
    }

    /// Build a tabulated density from `(z, nu)` samples. Negative abscissae are
    /// accepted only if they mirror a positive sample with the same value.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        let mut pos: Vec<(f64, f64)> = samples.iter().copied().filter(|p| p.0 > 0.0).collect();
        pos.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(z, v) in samples.iter().filter(|p| p.0 < 0.0) {
            let twin = pos.iter().find(|p| (p.0 + z).abs() <= 1e-12 * z.abs());
            match twin {
                Some(&(_, w)) if (w - v).abs() <= 1e-12 * w.abs().max(1e-300) => {}
                _ => return Err(Error::Domain(format!("tabulated density is not even at z = {z}"))),
            }
        }
        if samples.iter().any(|p| p.0 == 0.0) {
            return Err(Error::Domain("tabulated density sampled at z = 0".into()));
        }
        let d = LevyDensity::Tabulated {
            z: pos.iter().map(|p| p.0).collect(),
            density: pos.iter().map(|p| p.1).collect(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            LevyDensity::Zero => Ok(()),
            LevyDensity::Stable { alpha, scale } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(Error::Config(format!("stable alpha must lie in (0, 2), got {alpha}")));
                }
                pos("scale", *scale)
            }
            LevyDensity::Tempered { alpha, scale, tempering } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(Error::Config(format!("tempered alpha must lie in (0, 2), got {alpha}")));
                }
                pos("scale", *scale)?;
                pos("tempering", *tempering)
            }
            LevyDensity::LogPerturbed { log_power } => {
                if !(*log_power > 1.0 && log_power.is_finite()) {
                    return Err(Error::Config(format!("log power must exceed 1, got {log_power}")));
                }
                Ok(())
            }
            LevyDensity::Tabulated { z, density } => {
                if z.len() != density.len() || z.len() < 3 {
                    return Err(Error::Config("tabulated density needs at least 3 matching samples".into()));
                }
                if z.windows(2).any(|w| w[1] <= w[0]) || z[0] <= 0.0 {
                    return Err(Error::Config("tabulated abscissae must be positive and increasing".into()));
                }
                // densities vanishing on intervals are rejected (left open upstream)
                if density.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::Config("tabulated density must be positive on its support".into()));
                }
                let p = self.origin_exponent();
                if p >= 3.0 {
                    return Err(Error::Config(format!(
                        "tabulated density grows like |z|^-{p:.3} at the origin; not a Lévy density"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LevyDensity::Zero)
    }

    /// `nu(z)`; the density is singular at the origin.
    pub fn eval(&self, z: f64) -> Result<f64> {
        if z == 0.0 {
            return Err(Error::Domain("Lévy density evaluated at z = 0".into()));
        }
        if !z.is_finite() {
            return Err(Error::Domain(format!("Lévy density evaluated at z = {z}")));
        }
        Ok(self.at(z.abs()))
    }

    /// Density at `r > 0`, no checks. Hot path.
    #[inline]
    pub fn at(&self, r: f64) -> f64 {
        match self {
            LevyDensity::Zero => 0.0,
            LevyDensity::Stable { alpha, scale } => scale * r.powf(-1.0 - alpha),
            LevyDensity::Tempered { alpha, scale, tempering } => scale * (-tempering * r).exp() * r.powf(-1.0 - alpha),
            LevyDensity::LogPerturbed { log_power } => {
                if r >= LOGPERT_SUPPORT_END {
                    return 0.0;
                }
                let core = 1.0 / (r * r * r * (-r.ln()).powf(*log_power));
                if r <= LOGPERT_TAPER_START {
                    core
                } else {
                    core * smoothstep((LOGPERT_SUPPORT_END - r) / (LOGPERT_SUPPORT_END - LOGPERT_TAPER_START))
                }
            }
            LevyDensity::Tabulated { z, density } => {
                let n = z.len();
                if r > z[n - 1] {
                    return 0.0;
                }
                if r <= z[0] {
                    return density[0] * (r / z[0]).powf(-self.origin_exponent());
                }
                let k = z.partition_point(|&zi| zi < r).clamp(1, n - 1);
                let (z0, z1) = (z[k - 1], z[k]);
                let t = (r / z0).ln() / (z1 / z0).ln();
                (density[k - 1].ln() * (1.0 - t) + density[k].ln() * t).exp()
            }
        }
    }

    /// Power `p` with `nu(z) ~ z^{-p}` used below the first tabulated sample.
    fn origin_exponent(&self) -> f64 {
        match self {
            LevyDensity::Tabulated { z, density } => -(density[1] / density[0]).ln() / (z[1] / z[0]).ln(),
            _ => f64::NAN,
        }
    }

    /// Points in (0, ∞) where the density is not smooth; quadratures split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            LevyDensity::LogPerturbed { .. } => vec![LOGPERT_TAPER_START, LOGPERT_SUPPORT_END],
            LevyDensity::Tabulated { z, .. } => z.clone(),
            _ => Vec::new(),
        }
    }

    /// Right end of the support on the positive axis.
    pub fn support_end(&self) -> f64 {
        match self {
            LevyDensity::Zero => 0.0,
            LevyDensity::LogPerturbed { .. } => LOGPERT_SUPPORT_END,
            LevyDensity::Tabulated { z, .. } => z[z.len() - 1],
            _ => f64::INFINITY,
        }
    }

    /// Closed form of the one-sided moment `∫_0^eps z^2 nu(z) dz` where one exists.
    pub fn second_moment_closed(&self, eps: f64) -> Option<f64> {
        match self {
            LevyDensity::Zero => Some(0.0),
            LevyDensity::Stable { alpha, scale } => Some(scale * eps.powf(2.0 - alpha) / (2.0 - alpha)),
            LevyDensity::Tempered { alpha, scale, tempering } => {
                // ∫_0^eps c e^{-λz} z^{1-α} dz = c λ^{α-2} Γ(2-α) P(2-α, λ eps)
                let s = 2.0 - alpha;
                let g = statrs::function::gamma::gamma(s);
                let p = statrs::function::gamma::gamma_lr(s, tempering * eps);
                Some(scale * tempering.powf(-s) * g * p)
            }
            LevyDensity::LogPerturbed { log_power } if eps <= LOGPERT_TAPER_START => {
                // ∫_0^eps dz / (z (log 1/z)^a) = (log 1/eps)^{1-a} / (a-1)
                Some((-eps.ln()).powf(1.0 - log_power) / (log_power - 1.0))
            }
            LevyDensity::Tabulated { z, density } if eps <= z[0] => {
                let p = self.origin_exponent();
                let a = density[0] * z[0].powf(p);
                Some(a * eps.powf(3.0 - p) / (3.0 - p))
            }
            _ => None,
        }
    }

    /// Closed form of the one-sided tail mass `∫_u^∞ nu(z) dz` where one exists.
    pub fn tail_mass_closed(&self, u: f64) -> Option<f64> {
        match self {
            LevyDensity::Zero => Some(0.0),
            LevyDensity::Stable { alpha, scale } => Some(scale * u.powf(-alpha) / alpha),
            LevyDensity::LogPerturbed { .. } if u >= LOGPERT_SUPPORT_END => Some(0.0),
            LevyDensity::Tabulated { z, .. } if u >= z[z.len() - 1] => Some(0.0),
            _ => None,
        }
    }

    /// Analytic upper Blumenthal–Getoor index.
    pub fn bg_index_analytic(&self) -> f64 {
        match self {
            LevyDensity::Zero => 0.0,
            LevyDensity::Stable { alpha, .. } | LevyDensity::Tempered { alpha, .. } => *alpha,
            LevyDensity::LogPerturbed { .. } => 2.0,
            LevyDensity::Tabulated { .. } => (self.origin_exponent() - 1.0).clamp(0.0, 2.0),
        }
    }

    /// Short label for config summaries.
    pub fn label(&self) -> String {
        match self {
            LevyDensity::Zero => "zero".into(),
            LevyDensity::Stable { alpha, scale } => format!("stable(alpha={alpha}, c={scale})"),
            LevyDensity::LogPerturbed { log_power } => format!("log-perturbed(a={log_power})"),
            LevyDensity::Tempered { alpha, scale, tempering } => {
                format!("tempered(alpha={alpha}, c={scale}, lambda={tempering})")
            }
            LevyDensity::Tabulated { z, .. } => format!("tabulated({} samples)", z.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        let s = LevyDensity::stable(1.5, 1.0);
        assert_eq!(s.eval(1.0).unwrap(), 1.0);
        assert!((s.eval(-2.0).unwrap() - 2f64.powf(-2.5)).abs() < 1e-15);
        assert!((s.eval(-2.0).unwrap() - 0.176_776_695).abs() < 1e-8);
        let l = LevyDensity::log_perturbed(2.0);
        let want = 1.0 / (0.001 * 10f64.ln().powi(2));
        assert!((l.eval(0.1).unwrap() - want).abs() < 1e-9 * want);
        assert!((want - 188.62).abs() < 0.01);
        assert!(matches!(s.eval(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn logpert_taper_is_smooth_and_ends_at_half() {
        let l = LevyDensity::log_perturbed(2.0);
        assert_eq!(l.at(0.5), 0.0);
        assert_eq!(l.at(0.7), 0.0);
        assert!(l.at(0.49) > 0.0);
        // continuity at the taper start
        let a = l.at(LOGPERT_TAPER_START - 1e-9);
        let b = l.at(LOGPERT_TAPER_START + 1e-9);
        assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn closed_moments_match_quadrature() {
        let eps = 0.2;
        for d in [LevyDensity::stable(1.2, 0.7), LevyDensity::Tempered { alpha: 1.5, scale: 1.0, tempering: 2.0 }] {
            let closed = d.second_moment_closed(eps).unwrap();
            // log substitution tames the integrable endpoint
            let num = crate::quadrature::integrate(
                |s: f64| {
                    let z = s.exp();
                    z * z * z * d.at(z)
                },
                -200.0,
                eps.ln(),
                1e-14,
                1e-11,
            )
            .unwrap();
            assert!((closed - num).abs() < 1e-9 * closed, "{} {closed} {num}", d.label());
        }
        // the log-perturbed moment decays too slowly for a finite range; compare increments
        let d = LevyDensity::log_perturbed(2.5);
        let diff = d.second_moment_closed(eps).unwrap() - d.second_moment_closed(0.1).unwrap();
        let q = crate::quadrature::integrate(|z| z * z * d.at(z), 0.1, eps, 1e-14, 1e-12).unwrap();
        assert!((diff - q).abs() < 1e-10 * q, "{diff} {q}");
    }

    #[test]
    fn tabulated_rejects_asymmetry_and_extrapolates() {
        assert!(LevyDensity::tabulated(&[(0.1, 1.0), (-0.1, 2.0), (0.2, 0.5), (0.3, 0.2)]).is_err());
        // samples of z^{-2.5}
        let pts: Vec<(f64, f64)> = (0..20).map(|k| {
            let z = 0.01 * 1.3f64.powi(k);
            (z, z.powf(-2.5))
        }).collect();
        let t = LevyDensity::tabulated(&pts).unwrap();
        for z in [0.001, 0.015, 0.3] {
            assert!((t.at(z) - z.powf(-2.5)).abs() < 1e-9 * z.powf(-2.5));
        }
        assert!((t.bg_index_analytic() - 1.5).abs() < 1e-9);
        assert_eq!(t.at(100.0), 0.0);
    }
}
