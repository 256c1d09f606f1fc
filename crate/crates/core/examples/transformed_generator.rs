//! Drift, jump-ratio bound and the generator cross-check of the
//! ground-state-transformed process.

use gstlab::gst::{generator_cross_check, GstModel};
use gstlab::levy::{LevyDensity, LevyModel};
use gstlab::spectral::{discretize_h, ground_state, Grid1D, PotentialSpec};

fn main() -> gstlab::Result<()> {
    let model = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0))?;
    let op = discretize_h(&model, &PotentialSpec::quartic(), &Grid1D::new(16.0, 512)?)?;
    let gs = ground_state(&op)?;
    let gst = GstModel::new(model, gs, op, 0.05)?;
    for x in [0.0, 0.5, 1.0, 2.0, 4.0] {
        println!("x = {x:<4} drift {:+.6}", gst.drift(x)?);
    }
    for k in [1.0, 2.0, 4.0] {
        println!("ratio stays in [c, 1/c] on |x| <= {k}: c = {:.4e}", gst.local_ratio_bound(k)?);
    }
    let cc = generator_cross_check(&gst)?;
    println!("generator vs conjugated Hamiltonian: max relative discrepancy {:.2e}", cc.max_rel_error);
    Ok(())
}
