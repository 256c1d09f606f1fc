//! Blumenthal–Getoor index and dyadic band masses of a few Lévy densities.

use gstlab::levy::{BgMode, LevyDensity, LevyModel};

fn main() -> gstlab::Result<()> {
    for (label, density) in [
        ("stable 0.8", LevyDensity::stable(0.8, 1.0)),
        ("stable 1.5", LevyDensity::stable(1.5, 1.0)),
        ("log-perturbed, index 2", LevyDensity::log_perturbed(2.0)),
    ] {
        let m = LevyModel::new(0.0, density)?;
        println!(
            "{label:<24} analytic {:.4}  numeric {:.4}  psi(1) = {:.4}",
            m.bg_index(BgMode::Analytic)?,
            m.bg_index(BgMode::Numeric)?,
            m.char_exponent(1.0)?
        );
    }
    let m = LevyModel::new(0.0, LevyDensity::stable(1.5, 1.0))?;
    print!("{}", m.band_mass_table(6)?.to_csv());
    Ok(())
}
