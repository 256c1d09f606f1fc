//! Thinned Euler simulation of the transformed process, with the martingale
//! and stationarity checks.

use gstlab::gst::{GstModel, BUMPS};
use gstlab::levy::{LevyDensity, LevyModel};
use gstlab::sim::{martingale_check, stationarity_check, InitLaw, SimConfig, Simulator};
use gstlab::spectral::{discretize_h, ground_state, Grid1D, PotentialSpec};

fn main() -> gstlab::Result<()> {
    let model = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0))?;
    let op = discretize_h(&model, &PotentialSpec::quartic(), &Grid1D::new(16.0, 512)?)?;
    let gs = ground_state(&op)?;
    let gst = GstModel::new(model, gs, op, 0.05)?;

    let cfg = SimConfig { init: InitLaw::Stationary, ..SimConfig::new(1.0, 1e-3, 0.05, 8.0, 7, 2000) };
    let p = Simulator::new(&gst, &cfg)?.path(0)?;
    println!("path 0: {} accepted jumps, final state {:.4}", p.accepted().count(), p.states.last().unwrap());

    for s in martingale_check(&gst, &cfg, &BUMPS[..2], &[0.5, 1.0])? {
        println!("martingale t = {} z = {:+.2}", s.t, s.z);
    }
    let st = stationarity_check(&gst, &SimConfig { horizon: 2.0, ..cfg }, 2.0)?;
    println!("KS distance to phi0^2 at t = 2: {:.4}", st.ks);
    Ok(())
}
