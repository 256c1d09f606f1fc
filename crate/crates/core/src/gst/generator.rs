//! The transformed generator and its unitary-equivalence oracle.
//!
//! `apply_generator` evaluates the four terms of the generator (second-order
//! part, gradient drift, compensated thinned jump integral, jump drift) on the
//! lattice. `unitary_equiv_rhs` computes `−φ₀⁻¹ (H − λ₀)(φ₀ f)` straight from
//! the discrete operator. Agreement of the two is the discrete form of the
//! ground-state transform.

use serde::Serialize;

use super::model::GstModel;
use crate::error::{Error, Result};
use crate::spectral::D2_STENCIL;

/// Compactly supported `C^∞`-like bump `(1 − ((x − c)/w)²)^8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub centre: f64,
    pub width: f64,
}

impl Bump {
    pub const fn new(centre: f64, width: f64) -> Self {
        Self { centre, width }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.centre) / self.width;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - u * u).powi(8)
        }
    }

    pub fn sample(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.eval(x)).collect()
    }
}

/// The five test bumps of the cross-oracle; the first three drive the martingale checks.
pub const BUMPS: [Bump; 5] = [
    Bump::new(0.0, 1.0),
    Bump::new(0.5, 1.5),
    Bump::new(-0.75, 2.0),
    Bump::new(1.25, 1.0),
    Bump::new(0.0, 3.0),
];

fn guard(gst: &GstModel, i: usize) -> Result<()> {
    if i < 2 || i + 2 >= gst.gs.grid.points || !gst.interior(i) {
        return Err(Error::Domain(format!(
            "node x = {:.4} is within jump reach of the boundary; generator not evaluated",
            gst.gs.grid.x(i)
        )));
    }
    Ok(())
}

/// `L̃ f` at node `i` for a grid function `f` (zero outside the grid).
pub fn apply_generator(gst: &GstModel, f: &[f64], i: usize) -> Result<f64> {
    guard(gst, i)?;
    let g = &gst.gs.grid;
    let h = g.spacing();
    let n = g.points;
    let s2 = gst.levy.sigma * gst.levy.sigma;
    let d1 = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    let d2 = (D2_STENCIL[0] * f[i] + D2_STENCIL[1] * (f[i - 1] + f[i + 1]) + D2_STENCIL[2] * (f[i - 2] + f[i + 2]))
        / (h * h);
    let second_order = 0.5 * s2 * d2;
    let grad_drift = s2 * gst.log_derivative(i) * d1;
    // jump part on the lattice, cut at |kh| ≤ 1 for the compensation
    let w = &gst.op.weights;
    let lphi = &gst.gs.log_phi;
    let mut jump_drift = 0.0;
    let mut compensated = 0.0;
    let reach = (1.0 / h + 1e-9).floor() as usize;
    for (k, &wk) in w.iter().enumerate().skip(1) {
        if wk == 0.0 {
            continue;
        }
        let kh = k as f64 * h;
        let small = k <= reach;
        for (j, sgn) in [(i.checked_add(k), 1.0), (i.checked_sub(k), -1.0)] {
            let Some(j) = j.filter(|&j| j < n) else { continue };
            let r = (lphi[j] - lphi[i]).exp();
            let z = sgn * kh;
            if small {
                jump_drift += wk * z * (r - 1.0);
                compensated += wk * (f[j] - f[i] - z * d1) * r;
            } else {
                compensated += wk * (f[j] - f[i]) * r;
            }
        }
    }
    Ok(second_order + grad_drift + compensated + jump_drift * d1)
}

/// `−φ₀(x_i)⁻¹ ((H − λ₀)(φ₀ f))(x_i)` from the discrete operator.
pub fn unitary_equiv_rhs(gst: &GstModel, f: &[f64], i: usize) -> Result<f64> {
    guard(gst, i)?;
    let phi = &gst.gs.phi;
    let row = gst.op.matrix.row(i);
    let mut s = 0.0;
    for (j, &hij) in row.iter().enumerate() {
        if hij != 0.0 {
            s += hij * phi[j] * f[j];
        }
    }
    s -= gst.gs.lambda0 * phi[i] * f[i];
    Ok(-s / phi[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCheck {
    /// `max |apply − rhs| / (1 + |rhs|)`.
    pub max_rel_error: f64,
    pub worst_x: f64,
    pub nodes: usize,
}

/// Cross-oracle over the five bumps and all admissible interior nodes.
pub fn generator_cross_check(gst: &GstModel) -> Result<CrossCheck> {
    let nodes = gst.gs.grid.nodes();
    let mut worst = CrossCheck { max_rel_error: 0.0, worst_x: 0.0, nodes: 0 };
    for b in BUMPS {
        let f = b.sample(&nodes);
        for i in 0..nodes.len() {
            if guard(gst, i).is_err() {
                continue;
            }
            let a = apply_generator(gst, &f, i)?;
            let r = unitary_equiv_rhs(gst, &f, i)?;
            let e = (a - r).abs() / (1.0 + r.abs());
            worst.nodes += 1;
            if e > worst.max_rel_error {
                worst.max_rel_error = e;
                worst.worst_x = nodes[i];
            }
        }
    }
    Ok(worst)
}

/// Generator applied to every admissible node; `None` where refused.
pub fn generator_table(gst: &GstModel, f: &[f64]) -> Vec<Option<f64>> {
    (0..f.len()).map(|i| apply_generator(gst, f, i).ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;

    #[test]
    fn constants_are_killed() {
        for g in [fixtures::harmonic(), fixtures::stable_quartic()] {
            let one = vec![1.0; g.gs.grid.points];
            for i in (0..g.gs.grid.points).step_by(7) {
                if let Ok(v) = apply_generator(&g, &one, i) {
                    // lattice mass beyond the grid edge is the only leak
                    assert!(v.abs() <= g.op.escape_mass(i) + 1e-10, "x {} {v}", g.gs.grid.x(i));
                    // the rhs of a constant is the eigen-residual divided by φ₀
                    let top = g.gs.phi.iter().cloned().fold(0.0, f64::max);
                    let r = unitary_equiv_rhs(&g, &one, i).unwrap() * g.gs.phi[i] / top;
                    assert!(r.abs() <= 1e-8, "x {}: {r}", g.gs.grid.x(i));
                }
            }
        }
    }

    #[test]
    fn ornstein_uhlenbeck_on_the_identity() {
        let g = fixtures::harmonic();
        let nodes = g.gs.grid.nodes();
        for (i, &x) in nodes.iter().enumerate() {
            if x.abs() <= 4.0 {
                let v = apply_generator(&g, &nodes, i).unwrap();
                assert!((v + x).abs() < 1e-4, "x {x}: {v}");
            }
        }
    }

    #[test]
    fn boundary_nodes_are_refused() {
        let g = fixtures::stable_quartic();
        let f = BUMPS[0].sample(&g.gs.grid.nodes());
        assert!(apply_generator(&g, &f, 0).is_err());
        assert!(unitary_equiv_rhs(&g, &f, g.gs.grid.points - 1).is_err());
        assert!(generator_table(&g, &f)[1].is_none());
    }

    #[test]
    fn cross_oracle_agrees() {
        for g in [fixtures::harmonic(), fixtures::stable_quartic()] {
            let cc = generator_cross_check(&g).unwrap();
            assert!(cc.nodes > 0);
            assert!(cc.max_rel_error <= 1e-5, "{cc:?}");
        }
    }

    #[test]
    fn first_excited_ratio_is_an_eigenfunction() {
        let g = fixtures::stable_quartic();
        let f: Vec<f64> = g.gs.phi1.iter().zip(&g.gs.phi).map(|(a, b)| a / b).collect();
        let gap = g.gs.spectral_gap();
        assert!(gap > 0.0);
        let scale = f.iter().enumerate().filter(|(i, _)| g.gs.grid.x(*i).abs() <= 2.0).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        for i in 0..g.gs.grid.points {
            if g.gs.grid.x(i).abs() <= 2.0 {
                let v = unitary_equiv_rhs(&g, &f, i).unwrap();
                assert!((v + gap * f[i]).abs() < 1e-4 * gap * scale, "x {}: {v} vs {}", g.gs.grid.x(i), -gap * f[i]);
            }
        }
    }
}
