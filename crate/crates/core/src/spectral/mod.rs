//! Ground state of the non-local Schrödinger operator `−L + V` in one dimension.

mod grid;
mod ground_state;
mod kato;
mod operator;
mod potential;

pub use grid::Grid1D;
pub use ground_state::{ground_state, GroundState, TailKind, TailModel};
pub use kato::{kato_diagnostic, KatoRow};
pub use operator::{discretize_h, discretize_l, jump_weights, DiscreteOperator, D2_STENCIL};
pub use potential::PotentialSpec;
