//! Discretization of `H = −L + V` on a Dirichlet-truncated grid.
//!
//! Diffusion uses the five-point fourth-order stencil. The jump part is a
//! product-integration rule for `∫_0^∞ D(z) ν(z) dz`, where
//! `D(z) = f(x+z) + f(x−z) − 2f(x)` is even and vanishes at the origin:
//! an even polynomial fit on the first cell and degree-5 Lagrange pieces
//! further out. The result is a Toeplitz weight sequence `W_k`.

use nalgebra::{DMatrix, DVector, Matrix3};

use super::grid::Grid1D;
use super::potential::PotentialSpec;
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::quadrature::GaussRule;

/// Five-point second-difference coefficients for offsets 0, 1, 2.
pub const D2_STENCIL: [f64; 3] = [-2.5, 4.0 / 3.0, -1.0 / 12.0];

/// Relative tolerance on the discrete symbol against `ψ`.
const SYMBOL_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid1D,
    pub sigma: f64,
    /// `W_k` for `k = 0, 1, …` (`W_0 = 0`); the jump part acts as
    /// `Σ_k W_k (f_{i+k} + f_{i−k} − 2 f_i)`.
    pub weights: Vec<f64>,
    /// One-sided `ν` mass beyond the last modelled offset.
    pub far_tail: f64,
    /// Potential on the nodes; zero for the bare `−L`.
    pub potential: Vec<f64>,
    pub potential_spec: Option<PotentialSpec>,
    pub jump_free: bool,
    pub matrix: DMatrix<f64>,
}

impl DiscreteOperator {
    pub fn n(&self) -> usize {
        self.grid.points
    }

    /// Total killing rate of row `i` from the jump part, i.e. the ν-mass that
    /// leaves `[−R, R]` when starting at node `i`.
    pub fn escape_mass(&self, i: usize) -> f64 {
        let n = self.n();
        let mut s = 2.0 * self.far_tail;
        for (k, w) in self.weights.iter().enumerate().skip(1) {
            if i + k >= n {
                s += w;
            }
            if k > i {
                s += w;
            }
        }
        s
    }

    /// Matrix–vector product `H f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(f);
        (&self.matrix * v).as_slice().to_vec()
    }

    /// `(−L f)_i` without the potential.
    pub fn apply_minus_l(&self, f: &[f64]) -> Vec<f64> {
        let mut out = self.apply(f);
        for (o, (v, x)) in out.iter_mut().zip(self.potential.iter().zip(f)) {
            *o -= v * x;
        }
        out
    }

    /// Discrete symbol at frequency `y` on the infinite lattice.
    pub fn symbol(&self, model: &LevyModel, y: f64) -> Result<f64> {
        let h = self.grid.spacing();
        let th = y * h;
        let diff = -0.5 * self.sigma * self.sigma
            * (D2_STENCIL[0] + 2.0 * D2_STENCIL[1] * th.cos() + 2.0 * D2_STENCIL[2] * (2.0 * th).cos())
            / (h * h);
        let mut jump = 0.0;
        for (k, w) in self.weights.iter().enumerate().skip(1) {
            jump += 2.0 * w * (1.0 - (k as f64 * th).cos());
        }
        // beyond the last offset: ∫_Z^∞ 2(1 − cos yz) ν, closed by parts
        let z = self.weights.len() as f64 * h;
        let nu = |r: f64| model.density.at(r);
        let d1 = (nu(z * (1.0 + 1e-4)) - nu(z * (1.0 - 1e-4))) / (2e-4 * z);
        let cos_rest = -(y * z).sin() * nu(z) / y - (y * z).cos() * d1 / (y * y);
        jump += 2.0 * (self.far_tail - cos_rest);
        Ok(diff + jump)
    }
}

/// Even fit `D(u) = A u² + B u⁴ + C u⁶` through `u = 1, 2, 3`; returns
/// row `m` = coefficients mapping `(D(1), D(2), D(3))` to the `u^{2m+2}` term.
fn first_cell_inverse() -> Matrix3<f64> {
    let m = Matrix3::new(1.0, 1.0, 1.0, 4.0, 16.0, 64.0, 9.0, 81.0, 729.0);
    m.try_inverse().expect("Vandermonde is invertible")
}

fn lagrange(nodes: &[f64; 6], j: usize, u: f64) -> f64 {
    let mut p = 1.0;
    for (m, &v) in nodes.iter().enumerate() {
        if m != j {
            p *= (u - v) / (nodes[j] - v);
        }
    }
    p
}

/// Toeplitz weights `W_0..=W_cells` and the one-sided ν mass beyond `cells * h`.
pub fn jump_weights(model: &LevyModel, h: f64, cells: usize) -> Result<(Vec<f64>, f64)> {
    let mut w = vec![0.0; cells + 5];
    if model.density.is_zero() {
        return Ok((w, 0.0));
    }
    // first cell: moments ∫_0^h (z/h)^{2m} ν
    let mu2 = model.second_moment_one_sided(h)? / (h * h);
    let floor = h * 2f64.powi(-50);
    let mu4 = model.integrate_nu(floor, h, |z| (z / h).powi(4))?;
    let mu6 = model.integrate_nu(floor, h, |z| (z / h).powi(6))?;
    let inv = first_cell_inverse();
    let mus = [mu2, mu4, mu6];
    for k in 0..3 {
        for m in 0..3 {
            w[k + 1] += inv[(m, k)] * mus[m];
        }
    }
    // outer cells: degree-5 Lagrange on offsets k−2..k+3, D even, D(0) = 0
    let rule = GaussRule::new(16);
    let breaks = model.density.breakpoints();
    let end = model.density.support_end();
    for k in 1..cells {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        if a >= end {
            break;
        }
        let mut pieces = vec![a];
        pieces.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
        pieces.push(b.min(end));
        let base = k as f64 - 2.0;
        let nodes = [base, base + 1.0, base + 2.0, base + 3.0, base + 4.0, base + 5.0];
        let mut acc = [0.0f64; 6];
        for seg in pieces.windows(2) {
            for (z, wt) in rule.points(seg[0], seg[1]) {
                let nu = model.density.at(z) * wt;
                let u = z / h;
                for (j, a) in acc.iter_mut().enumerate() {
                    *a += lagrange(&nodes, j, u) * nu;
                }
            }
        }
        for (j, a) in acc.iter().enumerate() {
            let off = (nodes[j] as i64).unsigned_abs() as usize;
            if off != 0 {
                w[off] += a;
            }
        }
    }
    let far = model.tail_mass_one_sided(cells as f64 * h)?;
    // weights past the last cell end carry no ν of their own; fold the
    // interpolation spill into the tail so the row sum is preserved
    let mut spill = 0.0;
    for v in w.iter_mut().skip(cells + 1) {
        spill += *v;
        *v = 0.0;
    }
    w.truncate(cells + 1);
    Ok((w, far + spill))
}

pub fn discretize_l(model: &LevyModel, grid: &Grid1D) -> Result<DiscreteOperator> {
    grid.validate()?;
    model.validate()?;
    let n = grid.points;
    let h = grid.spacing();
    // cells reach past 2R so every offset beyond the grid is counted in the diagonal
    let cells = n + 2;
    let (weights, far_tail) = jump_weights(model, h, cells)?;
    let mut mat = DMatrix::<f64>::zeros(n, n);
    let dcoef = -0.5 * model.sigma * model.sigma / (h * h);
    let total: f64 = weights.iter().sum::<f64>() + far_tail;
    for i in 0..n {
        mat[(i, i)] = dcoef * D2_STENCIL[0] + 2.0 * total;
        for k in 1..n {
            let mut c = -weights.get(k).copied().unwrap_or(0.0);
            if k <= 2 {
                c += dcoef * D2_STENCIL[k];
            }
            if c == 0.0 {
                continue;
            }
            if i + k < n {
                mat[(i, i + k)] = c;
            }
            if i >= k {
                mat[(i, i - k)] = c;
            }
        }
    }
    let op = DiscreteOperator {
        grid: *grid,
        sigma: model.sigma,
        weights,
        far_tail,
        potential: vec![0.0; n],
        potential_spec: None,
        jump_free: model.density.is_zero(),
        matrix: mat,
    };
    check_symbol(&op, model)?;
    Ok(op)
}

/// Refuse grids whose discrete symbol misses `ψ` at moderate frequencies.
fn check_symbol(op: &DiscreteOperator, model: &LevyModel) -> Result<()> {
    let h = op.grid.spacing();
    for y in [1.0, std::f64::consts::PI / (16.0 * h)] {
        let want = model.char_exponent(y)?;
        let got = op.symbol(model, y)?;
        let rel = (got - want).abs() / want;
        if rel > SYMBOL_TOL {
            return Err(Error::Config(format!(
                "grid spacing {h:.4} too coarse for {}: discrete symbol off by {rel:.2e} at y = {y:.3}",
                model.density.label()
            )));
        }
    }
    Ok(())
}

pub fn discretize_h(model: &LevyModel, potential: &PotentialSpec, grid: &Grid1D) -> Result<DiscreteOperator> {
    potential.validate()?;
    let mut op = discretize_l(model, grid)?;
    for i in 0..grid.points {
        let v = potential.eval(grid.x(i));
        op.potential[i] = v;
        op.matrix[(i, i)] += v;
    }
    op.potential_spec = Some(potential.clone());
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyDensity;

    #[test]
    fn diffusion_of_quadratic_is_one() {
        let m = LevyModel::brownian(1.0);
        let g = Grid1D::new(8.0, 512).unwrap();
        let op = discretize_l(&m, &g).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        let lf = op.apply_minus_l(&f);
        for i in 2..g.points - 2 {
            assert!((-lf[i] - 1.0).abs() < 1e-9, "{i}: {}", lf[i]);
        }
    }

    #[test]
    fn constants_only_feel_the_escape_mass() {
        let m = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0)).unwrap();
        let g = Grid1D::new(6.0, 256).unwrap();
        let op = discretize_h(&m, &PotentialSpec::SquareWell { depth: 1.0, half_width: 1.0 }, &g).unwrap();
        let one = vec![1.0; g.points];
        let lf = op.apply_minus_l(&one);
        for i in [0, 10, 128, 200, 255] {
            assert!((lf[i] - op.escape_mass(i)).abs() < 1e-9 * op.escape_mass(i).max(1.0));
        }
        // the well shifts exactly the nodes inside it
        for i in 0..g.points {
            let x = g.x(i);
            let want = if x.abs() <= 1.0 { -1.0 } else { 0.0 };
            assert_eq!(op.potential[i], want);
        }
    }

    #[test]
    fn cosine_matches_symbol_at_centre() {
        let m = LevyModel::new(0.0, LevyDensity::stable(1.0, 1.0)).unwrap();
        let g = Grid1D::new(40.0, 4096).unwrap();
        let op = discretize_l(&m, &g).unwrap();
        let k = 2.0;
        // a window keeps the truncation away from the centre
        let f: Vec<f64> = g.nodes().iter().map(|&x| (k * x).cos()).collect();
        let lf = op.apply_minus_l(&f);
        let c = g.points / 2;
        let want = m.char_exponent(k).unwrap() * (k * g.x(c)).cos();
        // O(1/R) leak from the truncated cosine, far below the stated 1e-3
        assert!((lf[c] - want).abs() < 1e-3 * want.abs(), "{} vs {want}", lf[c]);
    }

    #[test]
    fn harmonic_matrix_is_the_textbook_one() {
        let m = LevyModel::brownian(1.0);
        let g = Grid1D::new(12.0, 256).unwrap();
        let op = discretize_h(&m, &PotentialSpec::harmonic(), &g).unwrap();
        let h = g.spacing();
        for i in 0..g.points {
            let x = g.x(i);
            assert!((op.matrix[(i, i)] - (1.25 / (h * h) + 0.5 * x * x)).abs() < 1e-9);
            if i + 2 < g.points {
                assert!((op.matrix[(i, i + 1)] + 2.0 / (3.0 * h * h)).abs() < 1e-9);
                assert!((op.matrix[(i, i + 2)] - 1.0 / (24.0 * h * h)).abs() < 1e-9);
            }
            if i + 3 < g.points {
                assert_eq!(op.matrix[(i, i + 3)], 0.0);
            }
        }
    }

    #[test]
    fn operator_is_symmetric() {
        let m = LevyModel::new(0.5, LevyDensity::log_perturbed(2.0)).unwrap();
        let g = Grid1D::new(4.0, 256).unwrap();
        let op = discretize_h(&m, &PotentialSpec::quartic(), &g).unwrap();
        let d = &op.matrix - op.matrix.transpose();
        assert!(d.amax() < 1e-12);
    }

    #[test]
    fn symbol_check_rejects_coarse_grids() {
        let m = LevyModel::new(0.0, LevyDensity::stable(1.9, 1.0)).unwrap();
        let g = Grid1D { half_width: 120.0, points: 256 };
        assert!(matches!(discretize_l(&m, &g), Err(Error::Config(_))));
    }
}
