//! Bottom eigenpair of the discrete Schrödinger operator.
//!
//! The shift sits just below `min V`, which is a lower bound for the spectrum
//! because the discrete `−L` is positive semi-definite; a successful Cholesky
//! factorization of `H − s` certifies it. Block inverse iteration with a
//! Rayleigh–Ritz step gives the first five eigenpairs, after which plain
//! inverse iteration polishes the ground state.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use super::grid::Grid1D;
use super::operator::DiscreteOperator;
use super::potential::PotentialSpec;
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

const BLOCK: usize = 5;
const MAX_ITER: usize = 10_000;
const BLOCK_ITER: usize = 2_000;
/// Below this fraction of `max φ₀` the eigenvector carries no sign information.
const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Shape of the extension beyond `±R`: `log φ = a + b * s(x)` with
/// `s = log|x|` (power law) or `s = x²` (Gaussian type).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TailKind {
    PowerLaw,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailModel {
    pub kind: TailKind,
    /// `(a, b)` for `x < −R` and `x > R`.
    pub left: (f64, f64),
    pub right: (f64, f64),
    pub r2: f64,
}

impl TailModel {
    fn eval_log(&self, x: f64) -> f64 {
        let (a, b) = if x < 0.0 { self.left } else { self.right };
        let s = match self.kind {
            TailKind::PowerLaw => x.abs().ln(),
            TailKind::Gaussian => x * x,
        };
        a + b * s
    }

    /// Mean fitted exponent of the two sides (power-law decay rate or
    /// Gaussian curvature).
    pub fn exponent(&self) -> f64 {
        0.5 * (self.left.1 + self.right.1)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundState {
    pub grid: Grid1D,
    pub lambda0: f64,
    pub phi: Vec<f64>,
    #[serde(skip)]
    pub log_phi: Vec<f64>,
    pub tail: TailModel,
    /// `‖Hφ − λφ‖_∞ / ‖φ‖_∞`.
    pub residual: f64,
    pub iterations: usize,
    /// Second Ritz pair, normalized like `phi` (sign arbitrary).
    pub lambda1: f64,
    #[serde(skip)]
    pub phi1: Vec<f64>,
    /// Ritz values of the five-vector cross-check.
    pub ritz: Vec<f64>,
    /// `|λ₀(inverse iteration) − λ₀(Ritz)|`.
    pub ritz_gap: f64,
    pub shift: f64,
}

impl GroundState {
    pub fn spectral_gap(&self) -> f64 {
        self.lambda1 - self.lambda0
    }

    /// `φ₀(x)` anywhere: log-linear between nodes, tail model outside.
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() <= self.grid.half_width {
            let p = self.grid.position(x);
            let k = p.round();
            if p == k {
                return self.phi[k as usize];
            }
        }
        self.eval_log(x).exp()
    }

    #[inline]
    pub fn eval_log(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x.abs() > g.half_width {
            return self.tail.eval_log(x);
        }
        let p = g.position(x);
        let n = g.points;
        let k = (p.floor() as usize).min(n - 2);
        let t = p - k as f64;
        self.log_phi[k] * (1.0 - t) + self.log_phi[k + 1] * t
    }

    /// Centred five-point derivative of `log φ₀` at node `i` (lower order at the ends).
    pub fn log_derivative(&self, i: usize) -> f64 {
        let l = &self.log_phi;
        let h = self.grid.spacing();
        let n = l.len();
        if i >= 2 && i + 2 < n {
            (l[i - 2] - 8.0 * l[i - 1] + 8.0 * l[i + 1] - l[i + 2]) / (12.0 * h)
        } else if i >= 1 && i + 1 < n {
            (l[i + 1] - l[i - 1]) / (2.0 * h)
        } else if i == 0 {
            (l[1] - l[0]) / h
        } else {
            (l[n - 1] - l[n - 2]) / h
        }
    }

    /// Largest discrete Lipschitz constant of `(log φ₀)′` on `|x| ≤ window`.
    pub fn log_derivative_lipschitz(&self, window: f64) -> f64 {
        let h = self.grid.spacing();
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.points - 1 {
            if self.grid.x(i).abs() <= window && self.grid.x(i + 1).abs() <= window {
                worst = worst.max((self.log_derivative(i + 1) - self.log_derivative(i)).abs() / h);
            }
        }
        worst
    }

    /// Largest `|x|` up to which `φ₀` stays above round-off level (`1e-10` of its maximum)
    /// on both sides.
    pub fn resolved_radius(&self) -> f64 {
        let top = self.phi.iter().copied().fold(0.0, f64::max);
        let n = self.phi.len();
        let first = self.phi.iter().position(|&p| p >= MEANINGFUL * top).unwrap_or(0);
        let last = self.phi.iter().rposition(|&p| p >= MEANINGFUL * top).unwrap_or(n - 1);
        self.grid.x(first).abs().min(self.grid.x(last).abs())
    }

    /// Mass `Σ φ² h` carried by the three outermost cells on each side.
    pub fn boundary_mass(&self) -> f64 {
        let h = self.grid.spacing();
        let n = self.phi.len();
        (0..3).chain(n - 3..n).map(|i| self.phi[i] * self.phi[i] * h).sum()
    }

    /// Max `|φ(x_i) − φ(−x_i)|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.phi.len();
        (0..n / 2).map(|i| (self.phi[i] - self.phi[n - 1 - i]).abs()).fold(0.0, f64::max)
    }

    /// Export: CSV columns `x, phi0, V` behind a commented metadata block.
    pub fn to_csv(&self, potential: &[f64], seed: u64) -> String {
        let mut s = format!(
            "# master_seed={seed}\n# lambda0={:.15e}\n# residual={:.3e}\n# tail_exponent={:.6}\nx,phi0,V\n",
            self.lambda0,
            self.residual,
            self.tail.exponent()
        );
        for i in 0..self.grid.points {
            s.push_str(&format!("{:.9e},{:.12e},{:.9e}\n", self.grid.x(i), self.phi[i], potential[i]));
        }
        s
    }
}

fn residual(h: &DMatrix<f64>, v: &DVector<f64>, lambda: f64) -> f64 {
    let r = h * v - v * lambda;
    r.amax() / v.amax()
}

fn orthonormalize(x: DMatrix<f64>) -> DMatrix<f64> {
    x.qr().q()
}

pub fn ground_state(op: &DiscreteOperator) -> Result<GroundState> {
    let n = op.n();
    let h = op.grid.spacing();
    let hm = &op.matrix;
    let vmin = op.potential.iter().copied().fold(f64::INFINITY, f64::min);

    // certified shift below the spectrum
    let mut margin = 1.0;
    let (shift, chol) = loop {
        let s = vmin - margin;
        let mut a = hm.clone();
        for i in 0..n {
            a[(i, i)] -= s;
        }
        if let Some(c) = a.cholesky() {
            break (s, c);
        }
        margin *= 2.0;
        if margin > 1e12 {
            return Err(Error::Numerical("no shift below the spectrum makes H − s positive definite".into()));
        }
    };
    log::debug!("ground state: shift {shift}, n = {n}");

    // block inverse iteration with Rayleigh–Ritz
    let mut r = rng::stream(0, Purpose::RitzStart, n as u64);
    let mut x = DMatrix::<f64>::from_fn(n, BLOCK, |_, j| {
        if j == 0 {
            1.0
        } else {
            r.random::<f64>() - 0.5
        }
    });
    x = orthonormalize(x);
    let mut ritz = vec![f64::INFINITY; BLOCK];
    let mut iterations = 0;
    let mut vecs = x.clone();
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let y = chol.solve(&x);
        let q = orthonormalize(y);
        let hq = hm * &q;
        let small = q.transpose() * &hq;
        let eig = SymmetricEigen::new(small);
        let mut order: Vec<usize> = (0..BLOCK).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let new: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut basis = DMatrix::<f64>::zeros(BLOCK, BLOCK);
        for (c, &k) in order.iter().enumerate() {
            basis.set_column(c, &eig.eigenvectors.column(k));
        }
        vecs = &q * basis;
        let change = (new[0] - ritz[0]).abs().max((new[1] - ritz[1]).abs());
        ritz = new;
        x = vecs.clone();
        // Ritz values carry round-off of order ε‖H‖; the polish below does the fine work
        if change < 1e-10 * ritz[1].abs().max(1.0) || it + 1 >= BLOCK_ITER {
            break;
        }
    }

    // polish the ground state by plain inverse iteration
    let mut v: DVector<f64> = vecs.column(0).into();
    let mut rq = v.dot(&(hm * &v));
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut w = chol.solve(&v);
        w /= w.norm();
        let hv = hm * &w;
        let rq_new = w.dot(&hv);
        let d = (rq_new - rq).abs();
        v = w;
        rq = rq_new;
        iterations += 1;
        if d < 1e-12 * rq.abs().max(1.0) && residual(hm, &v, rq) <= 1e-10 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!("inverse iteration did not converge in {MAX_ITER} steps")));
    }
    let res = residual(hm, &v, rq);

    // sign, normalization, positivity
    if v.sum() < 0.0 {
        v = -v;
    }
    let scale = 1.0 / (v.norm_squared() * h).sqrt();
    let mut phi: Vec<f64> = v.iter().map(|x| x * scale).collect();
    // Far in a fast-decaying tail the vector is pure roundoff and may flip sign;
    // only a sign change above that level is a genuine failure.
    let floor = ROUNDOFF_FLOOR * phi.iter().copied().fold(0.0, f64::max);
    for p in phi.iter_mut().filter(|p| p.abs() < floor) {
        *p = p.abs().max(f64::MIN_POSITIVE);
    }
    if let Some(i) = phi.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::Assumption(format!(
            "ground state not strictly positive: φ₀({:.4}) = {:.3e}; pseudo-ground state or grid half-width too small",
            op.grid.x(i),
            phi[i]
        )));
    }
    let mut phi1: Vec<f64> = vecs.column(1).iter().copied().collect();
    let s1 = 1.0 / (phi1.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
    phi1.iter_mut().for_each(|x| *x *= s1);

    if let Some(PotentialSpec::SquareWell { depth, .. }) = &op.potential_spec {
        if rq >= 0.0 {
            return Err(Error::Assumption(format!(
                "square well of depth {depth} has no bound state on this grid (λ₀ = {rq:.6} ≥ 0)"
            )));
        }
    }

    let log_phi: Vec<f64> = phi.iter().map(|p| p.ln()).collect();
    let tail = fit_tail(&op.grid, &log_phi, if op.jump_free { TailKind::Gaussian } else { TailKind::PowerLaw })?;
    let gs = GroundState {
        grid: op.grid,
        lambda0: rq,
        phi,
        log_phi,
        tail,
        residual: res,
        iterations,
        lambda1: ritz[1],
        phi1,
        ritz_gap: (rq - ritz[0]).abs(),
        ritz: ritz.clone(),
        shift,
    };
    let bm = gs.boundary_mass();
    if bm > 1e-4 {
        return Err(Error::Config(format!(
            "ground state carries mass {bm:.2e} within 3 cells of ±R; increase the grid half-width"
        )));
    }
    Ok(gs)
}

/// Relative size below which grid values of `φ₀` are dominated by solver round-off.
const MEANINGFUL: f64 = 1e-10;

/// Regression of `log φ₀` on the outer 10% of the nodes where `φ₀` is
/// numerically meaningful, each side separately.
fn fit_tail(grid: &Grid1D, log_phi: &[f64], kind: TailKind) -> Result<TailModel> {
    let n = grid.points;
    let top = log_phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = top + MEANINGFUL.ln();
    let first = log_phi.iter().position(|&l| l >= floor).unwrap_or(0);
    let last = log_phi.iter().rposition(|&l| l >= floor).unwrap_or(n - 1);
    let m = ((last - first + 1) / 10).max(4);
    let s = |x: f64| match kind {
        TailKind::PowerLaw => x.abs().ln(),
        TailKind::Gaussian => x * x,
    };
    let left: Vec<(f64, f64)> = (first..first + m).map(|i| (s(grid.x(i)), log_phi[i])).collect();
    let right: Vec<(f64, f64)> = (last + 1 - m..=last).map(|i| (s(grid.x(i)), log_phi[i])).collect();
    let fl = crate::stats::linear_fit(&left).ok_or_else(|| Error::Numerical("tail fit failed".into()))?;
    let fr = crate::stats::linear_fit(&right).ok_or_else(|| Error::Numerical("tail fit failed".into()))?;
    Ok(TailModel {
        kind,
        left: (fl.intercept, fl.slope),
        right: (fr.intercept, fr.slope),
        r2: fl.r2.min(fr.r2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{LevyDensity, LevyModel};
    use crate::spectral::{discretize_h, PotentialSpec};

    fn harmonic(n: usize) -> (DiscreteOperator, GroundState) {
        let m = LevyModel::brownian(1.0);
        let g = Grid1D::new(12.0, n).unwrap();
        let op = discretize_h(&m, &PotentialSpec::harmonic(), &g).unwrap();
        let gs = ground_state(&op).unwrap();
        (op, gs)
    }

    #[test]
    fn harmonic_oscillator_oracle() {
        let (_, gs) = harmonic(2048);
        assert!((gs.lambda0 - 0.5).abs() < 1e-6, "{}", gs.lambda0);
        assert!(gs.residual <= 1e-8);
        let norm = std::f64::consts::PI.powf(-0.25);
        let mut worst: f64 = 0.0;
        for i in 0..gs.grid.points {
            let x = gs.grid.x(i);
            if x.abs() <= 4.0 {
                let want = norm * (-0.5 * x * x).exp();
                worst = worst.max((gs.phi[i] - want).abs() / want);
            }
        }
        assert!(worst < 1e-4, "{worst}");
        // first excited level of the oscillator
        assert!((gs.lambda1 - 1.5).abs() < 1e-5, "{}", gs.lambda1);
        assert!(gs.asymmetry() < 1e-10);
        // Gaussian extension: x = 5 is inside, x = 13 uses the tail model
        for x in [5.0f64] {
            let want = norm * (-0.5 * x * x).exp();
            assert!((gs.eval(x) - want).abs() < 1e-3 * want, "x={x}: {} vs {want}", gs.eval(x));
        }
    }

    #[test]
    fn rayleigh_quotients_stay_above_lambda0() {
        let (op, gs) = harmonic(256);
        let mut r = rng::stream(1, Purpose::Misc, 0);
        for _ in 0..20 {
            let u = DVector::<f64>::from_fn(op.n(), |_, _| r.random::<f64>() - 0.5).normalize();
            assert!(u.dot(&(&op.matrix * &u)) >= gs.lambda0 - 1e-10);
        }
    }

    #[test]
    fn node_values_are_exact_and_decay_is_monotone() {
        let (_, gs) = harmonic(512);
        for i in [0, 17, 256, 511] {
            let (a, b) = (gs.eval(gs.grid.x(i)), gs.phi[i]);
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
        let mut prev = gs.eval(0.0);
        for k in 1..200 {
            let v = gs.eval(0.07 * k as f64);
            assert!(v <= prev);
            prev = v;
        }
        // far out the value underflows; the log-tail must stay finite and decreasing
        let (near, far) = (gs.eval_log(13.0), gs.eval_log(40.0));
        assert!(far.is_finite() && far < near);
    }

    #[test]
    fn square_well_binds_or_fails() {
        let m = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0)).unwrap();
        let g = Grid1D::new(16.0, 512).unwrap();
        let op = discretize_h(&m, &PotentialSpec::SquareWell { depth: 3.0, half_width: 1.0 }, &g).unwrap();
        match ground_state(&op) {
            Ok(gs) => assert!(gs.lambda0 < 0.0),
            Err(e) => assert!(matches!(e, Error::Config(_) | Error::Assumption(_)), "{e}"),
        }
    }
}
