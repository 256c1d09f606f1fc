//! Multifractal spectrum of stable Lévy paths by box counting, against the
//! linear reference curve.

use gstlab::fractal::{levy_baseline, top_exponent};
use gstlab::levy::{LevyDensity, LevyModel, LevyPathConfig};

fn main() -> gstlab::Result<()> {
    let model = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0))?;
    let cfg = LevyPathConfig::new(1.0, 1e-5, 1e-3);
    let hs = [0.2, 0.3, 0.4, 0.5, top_exponent(1.5, 0.0)];
    let est = levy_baseline(&model, &cfg, 40, 11, &hs)?;
    for row in &est.rows {
        println!(
            "h = {:.3}  D_hat = {:>6}  reference {:>6}",
            row.h,
            row.d_hat.map_or("-".into(), |d| format!("{d:.3}")),
            row.reference.map_or("-".into(), |d| format!("{d:.3}"))
        );
    }
    Ok(())
}
