//! Path-regularity analysis of the jump point system.

mod covering;
mod dyadic;
mod holder;
mod points;
mod rate;
mod spectrum;

pub use covering::{covering_measure, dyadic_eps_grid, CoverRow};
pub use dyadic::{dyadic_jump_counts, DyadicCounts, DyadicRow};
pub use holder::{holder_empirical, holder_theoretical, single_jump_bound, oscillations, HolderEstimate, HOLDER_CLAMP};
pub use points::{PointSystem, ScaleWindow};
pub use rate::{approximation_rate, approximation_rate_with, BandGaps, RateEstimate, DELTA_MAX};
pub use spectrum::{
    box_dimension, levy_baseline, levy_reference, monotone_residual, spectrum_estimate, top_exponent, BoxCounter,
    SpectrumEstimate, SpectrumRow, KAPPA, MIN_BIN_COUNT,
};
