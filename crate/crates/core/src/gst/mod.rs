//! Ground-state transformed generator: ratio kernel, drift, envelopes and the
//! unitary-equivalence check.

mod generator;
mod model;

pub use generator::{apply_generator, generator_cross_check, generator_table, unitary_equiv_rhs, Bump, CrossCheck, BUMPS};
pub use model::{DriftField, GstModel};
