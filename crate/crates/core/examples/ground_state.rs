//! Ground state of `−L + V` for the harmonic oscillator and for a stable
//! generator under a quartic potential.

use gstlab::levy::{LevyDensity, LevyModel};
use gstlab::spectral::{discretize_h, ground_state, Grid1D, PotentialSpec};

fn main() -> gstlab::Result<()> {
    let cases = [
        ("Brownian, x^2/2", LevyModel::brownian(1.0), PotentialSpec::harmonic(), 8.0),
        ("stable 1.5, x^4", LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0))?, PotentialSpec::quartic(), 16.0),
    ];
    for (label, model, v, r) in cases {
        let op = discretize_h(&model, &v, &Grid1D::new(r, 512)?)?;
        let gs = ground_state(&op)?;
        println!(
            "{label:<18} lambda0 {:.8}  gap {:.6}  residual {:.1e}  tail {:?} (exponent {:.3})",
            gs.lambda0,
            gs.lambda1 - gs.lambda0,
            gs.residual,
            gs.tail.kind,
            gs.tail.exponent()
        );
    }
    Ok(())
}
