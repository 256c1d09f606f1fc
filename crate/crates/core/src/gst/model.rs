use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::quadrature::GaussRule;
use crate::spectral::{DiscreteOperator, GroundState};

/// Drift on the grid nodes, split into its gradient and jump parts.
#[derive(Debug, Clone, Serialize)]
pub struct DriftField {
    pub x: Vec<f64>,
    /// `σ² (ln φ₀)′`.
    pub grad: Vec<f64>,
    /// `∫_{|z|≤1} z (ratio − 1) ν`, Taylor-closed below the small-jump cut-off.
    pub jump: Vec<f64>,
    /// `∫_{ε_s<|z|≤1} z ratio ν`, the compensator of the simulated small-band jumps.
    pub compensator: Vec<f64>,
    h: f64,
    x0: f64,
}

impl DriftField {
    fn interp(&self, v: &[f64], x: f64) -> f64 {
        let p = ((x - self.x0) / self.h).clamp(0.0, (v.len() - 1) as f64);
        let k = (p.floor() as usize).min(v.len() - 2);
        let t = p - k as f64;
        v[k] * (1.0 - t) + v[k + 1] * t
    }

    pub fn total_at_node(&self, i: usize) -> f64 {
        self.grad[i] + self.jump[i]
    }

    pub fn total(&self, x: f64) -> f64 {
        self.interp(&self.grad, x) + self.interp(&self.jump, x)
    }

    /// Continuous drift used by the Euler step: total drift minus the small-band compensator.
    pub fn net(&self, x: f64) -> f64 {
        self.total(x) - self.interp(&self.compensator, x)
    }

    pub fn compensator_at(&self, x: f64) -> f64 {
        self.interp(&self.compensator, x)
    }

    /// Export CSV `(x, b_grad, b_jump, b_total)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,b_grad,b_jump,b_total\n");
        for i in 0..self.x.len() {
            s.push_str(&format!(
                "{:.9e},{:.12e},{:.12e},{:.12e}\n",
                self.x[i],
                self.grad[i],
                self.jump[i],
                self.grad[i] + self.jump[i]
            ));
        }
        s
    }
}

/// Ground-state transformed process: Lévy model, ground state, discrete `H`
/// and everything derived from them for a fixed small-jump cut-off.
#[derive(Debug, Clone)]
pub struct GstModel {
    pub levy: LevyModel,
    pub gs: GroundState,
    pub op: DiscreteOperator,
    pub eps_small: f64,
    pub drift: DriftField,
    /// `∫_{|z|≤ε_s} z² ν` and `∫_{|z|≤ε_s} z⁴ ν`, two-sided.
    pub m2_small: f64,
    pub m4_small: f64,
    log_deriv: Vec<f64>,
    /// Running maxima of `φ₀` from the left / right, for the big-jump envelope.
    prefix_max: Vec<f64>,
    suffix_max: Vec<f64>,
    range: RangeTable,
}

/// Sparse tables for O(1) range maxima and minima of the node values.
#[derive(Debug, Clone)]
struct RangeTable {
    max: Vec<Vec<f64>>,
    min: Vec<Vec<f64>>,
}

impl RangeTable {
    fn new(v: &[f64]) -> Self {
        let mut max = vec![v.to_vec()];
        let mut min = vec![v.to_vec()];
        let mut w = 1;
        while 2 * w <= v.len() {
            let (pm, pn) = (max.last().unwrap(), min.last().unwrap());
            let m: Vec<f64> = (0..=v.len() - 2 * w).map(|i| pm[i].max(pm[i + w])).collect();
            let n: Vec<f64> = (0..=v.len() - 2 * w).map(|i| pn[i].min(pn[i + w])).collect();
            max.push(m);
            min.push(n);
            w *= 2;
        }
        Self { max, min }
    }

    /// `(max, min)` over nodes `a..=b`.
    fn query(&self, a: usize, b: usize) -> (f64, f64) {
        let lvl = (usize::BITS - 1 - (b - a + 1).leading_zeros()) as usize;
        let w = 1 << lvl;
        (
            self.max[lvl][a].max(self.max[lvl][b + 1 - w]),
            self.min[lvl][a].min(self.min[lvl][b + 1 - w]),
        )
    }
}

impl GstModel {
    pub fn new(levy: LevyModel, gs: GroundState, op: DiscreteOperator, eps_small: f64) -> Result<Self> {
        if !(eps_small > 0.0 && eps_small <= 1.0) {
            return Err(Error::Config(format!("small-jump cut-off must lie in (0, 1], got {eps_small}")));
        }
        let n = gs.grid.points;
        let log_deriv: Vec<f64> = (0..n).map(|i| gs.log_derivative(i)).collect();
        if let Some(i) = log_deriv.iter().position(|g| !g.is_finite()) {
            return Err(Error::Assumption(format!(
                "(ln φ₀)′ is not finite at x = {:.4}; the ground state is not locally regular",
                gs.grid.x(i)
            )));
        }
        let m2_small = levy.second_moment(eps_small)?;
        let m4_small = if levy.density.is_zero() {
            0.0
        } else {
            2.0 * levy.integrate_nu(eps_small * 2f64.powi(-50), eps_small, |z| z.powi(4))?
        };
        let mut prefix_max = gs.phi.clone();
        for i in 1..n {
            prefix_max[i] = prefix_max[i].max(prefix_max[i - 1]);
        }
        let mut suffix_max = gs.phi.clone();
        for i in (0..n - 1).rev() {
            suffix_max[i] = suffix_max[i].max(suffix_max[i + 1]);
        }
        let gs_phi = gs.phi.clone();
        let placeholder = DriftField {
            x: gs.grid.nodes(),
            grad: Vec::new(),
            jump: Vec::new(),
            compensator: Vec::new(),
            h: gs.grid.spacing(),
            x0: -gs.grid.half_width,
        };
        let mut m = Self {
            levy,
            gs,
            op,
            eps_small,
            drift: placeholder,
            m2_small,
            m4_small,
            log_deriv,
            prefix_max,
            suffix_max,
            range: RangeTable::new(&gs_phi),
        };
        m.drift = m.build_drift()?;
        Ok(m)
    }

    /// `φ₀(x + z) / φ₀(x)`.
    #[inline]
    pub fn ratio(&self, x: f64, z: f64) -> f64 {
        (self.gs.eval_log(x + z) - self.gs.eval_log(x)).exp()
    }

    /// `(ln φ₀)′` at node `i`.
    pub fn log_derivative(&self, i: usize) -> f64 {
        self.log_deriv[i]
    }

    /// `(ln φ₀)′` interpolated.
    pub fn log_derivative_at(&self, x: f64) -> f64 {
        self.drift.interp(&self.log_deriv, x)
    }

    fn build_drift(&self) -> Result<DriftField> {
        let g = &self.gs.grid;
        let n = g.points;
        let s2 = self.levy.sigma * self.levy.sigma;
        let grad: Vec<f64> = self.log_deriv.iter().map(|d| s2 * d).collect();
        let mut jump = vec![0.0; n];
        let mut comp = vec![0.0; n];
        if !self.levy.density.is_zero() {
            let bands = self.band_nodes();
            for i in 0..n {
                let x = g.x(i);
                let mut c = 0.0;
                for &(z, w) in &bands {
                    // odd pairing: z (ratio(z) − ratio(−z)), even part dropped exactly
                    c += w * z * (self.ratio(x, z) - self.ratio(x, -z));
                }
                if !c.is_finite() {
                    return Err(Error::Numerical(format!(
                        "drift quadrature diverged at x = {x:.4}; (ln φ₀)′ is not locally bounded"
                    )));
                }
                comp[i] = c;
                jump[i] = c + self.log_deriv[i] * self.m2_small;
            }
        }
        Ok(DriftField {
            x: g.nodes(),
            grad,
            jump,
            compensator: comp,
            h: g.spacing(),
            x0: -g.half_width,
        })
    }

    /// Quadrature nodes `(z, w ν(z))` on `(ε_s, 1]`, dyadic bands with a Gauss rule each.
    pub fn band_nodes(&self) -> Vec<(f64, f64)> {
        let rule = GaussRule::new(16);
        let d = &self.levy.density;
        let end = d.support_end().min(1.0);
        let mut cuts = vec![self.eps_small];
        let mut x = self.eps_small;
        while 2.0 * x < end {
            x *= 2.0;
            cuts.push(x);
        }
        cuts.extend(d.breakpoints().into_iter().filter(|&p| p > self.eps_small && p < end));
        // φ₀ is log-linear between nodes; cutting at multiples of h keeps the rule on smooth pieces
        let h = self.gs.grid.spacing();
        let mut k = (self.eps_small / h).ceil();
        while k * h < end.min(8.0 * h) {
            cuts.push(k * h);
            k += 1.0;
        }
        cuts.push(end);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            out.extend(rule.points(w[0], w[1]).map(|(z, wt)| (z, wt * d.at(z))));
        }
        out
    }

    /// Drift `b(x)`; only defined on the grid.
    pub fn drift(&self, x: f64) -> Result<f64> {
        if x.abs() > self.gs.grid.half_width {
            return Err(Error::Domain(format!("drift requested outside the grid at x = {x}")));
        }
        Ok(self.drift.total(x))
    }

    /// Variance rate of the Gaussian standing in for jumps below the cut-off,
    /// with the ratio frozen at `x` (second-order even part).
    pub fn small_jump_variance(&self, x: f64) -> f64 {
        if self.m2_small == 0.0 {
            return 0.0;
        }
        let g = self.log_derivative_at(x);
        let h = self.gs.grid.spacing();
        let dg = (self.log_derivative_at(x + h) - self.log_derivative_at(x - h)) / (2.0 * h);
        (self.m2_small + 0.5 * (g * g + dg) * self.m4_small).max(0.0)
    }

    /// Lower ratio bound `c(K)` over `|x| ≤ K`, `|z| ≤ 1`, with a 10% safety margin.
    pub fn local_ratio_bound(&self, k: f64) -> Result<f64> {
        if !(k > 0.0) {
            return Err(Error::Domain(format!("window must be positive, got {k}")));
        }
        let h = self.gs.grid.spacing();
        let nx = ((2.0 * k / h).ceil() as usize).max(2);
        let nz = 400;
        let mut worst: f64 = 1.0;
        for a in 0..=nx {
            let x = -k + 2.0 * k * a as f64 / nx as f64;
            let lx = self.gs.eval_log(x);
            for b in 0..=nz {
                let z = -1.0 + 2.0 * b as f64 / nz as f64;
                let d = (self.gs.eval_log(x + z) - lx).abs();
                worst = worst.min((-d).exp());
            }
        }
        let c = 0.9 * worst;
        if c < 1e-6 {
            log::warn!("ratio bound c({k}) = {c:.3e}; thinning in this window will be inefficient");
        }
        Ok(c)
    }

    /// Upper bound for `ratio(x, z)` over `|z| > 1`.
    pub fn big_jump_envelope(&self, x: f64) -> f64 {
        self.big_jump_envelope_over(x, x)
    }

    /// Upper bound for `ratio(x, z)` over `|z| > 1` and `x ∈ [a, b]`.
    pub fn big_jump_envelope_over(&self, a: f64, b: f64) -> f64 {
        let g = &self.gs.grid;
        let n = g.points;
        let r = g.half_width;
        // sup over y ≤ b − 1, and over y ≥ a + 1.
        let (u, v) = (b - 1.0, a + 1.0);
        let left = if u < -r {
            self.gs.eval(u)
        } else {
            let k = (g.position(u.min(r)).floor() as usize).min(n - 1);
            self.prefix_max[k].max(self.gs.eval(u))
        };
        let right = if v > r {
            self.gs.eval(v)
        } else {
            let k = (g.position(v.max(-r)).ceil() as usize).min(n - 1);
            self.suffix_max[k].max(self.gs.eval(v))
        };
        let (_, inf) = self.phi_range(a, b);
        left.max(right) / inf * (1.0 + 1e-9)
    }

    /// Smallest `r` with `b(x) sign(x) < 0` at every node with `r ≤ |x| ≤ R − 1`
    /// (capped at the resolved part of the ground state).
    pub fn pull_back_radius(&self) -> Option<f64> {
        let g = &self.gs.grid;
        let lim = (g.half_width - 1.0).min(self.gs.resolved_radius());
        let mut last_bad = 0.0f64;
        for i in 0..g.points {
            let x = g.x(i);
            if x.abs() <= lim && x != 0.0 && self.drift.total_at_node(i) * x.signum() >= 0.0 {
                last_bad = last_bad.max(x.abs());
            }
        }
        let r = last_bad + g.spacing();
        (r <= lim).then_some(r)
    }

    /// `(sup, inf)` of `φ₀` over `[a, b]`. Between nodes `φ₀` is log-linear,
    /// hence monotone, so nodes and endpoints suffice. Outside the grid the
    /// tail decays away from it.
    pub fn phi_range(&self, a: f64, b: f64) -> (f64, f64) {
        let g = &self.gs.grid;
        let r = g.half_width;
        let (ea, eb) = (self.gs.eval(a), self.gs.eval(b));
        let (mut hi, mut lo) = (ea.max(eb), ea.min(eb));
        let (ca, cb) = (a.max(-r), b.min(r));
        if ca <= cb {
            let (fa, fb) = (self.gs.eval(ca), self.gs.eval(cb));
            hi = hi.max(fa).max(fb);
            lo = lo.min(fa).min(fb);
            let i0 = g.position(ca).ceil() as usize;
            let i1 = (g.position(cb).floor() as usize).min(g.points - 1);
            if i0 <= i1 {
                let (m, n) = self.range.query(i0, i1);
                hi = hi.max(m);
                lo = lo.min(n);
            }
        }
        (hi, lo)
    }

    /// Nodes where jumps up to size 1 stay on the grid.
    pub fn interior(&self, i: usize) -> bool {
        self.gs.grid.x(i).abs() <= self.gs.grid.half_width - 1.0
    }
}
