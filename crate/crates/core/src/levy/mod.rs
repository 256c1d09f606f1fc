//! Symmetric Lévy triplets: densities, symbol, index, band masses and path sampling.

mod density;
mod model;
mod path;
mod sampler;

pub use density::{LevyDensity, LOGPERT_SUPPORT_END, LOGPERT_TAPER_START};
pub use model::{BandMassTable, BgMode, LevyModel, Moment};
pub use path::{sample_levy_path, LevyPathConfig, LevyPathSampler};
pub use sampler::{BandSampler, BigJumpSampler};
