//! Ground-state-transformed jump processes: construction, simulation and
//! path-regularity analysis.
//!
//! The pipeline is
//! [`levy`] (triplet, symbol, index) →
//! [`spectral`] (ground state of `−L + V`) →
//! [`gst`] (drift, thinned kernel, generator) →
//! [`sim`] (Euler scheme with Poisson thinning) →
//! [`fractal`] (approximation rates, Hölder exponents, spectrum) →
//! [`experiment`] (scenarios, gates, reports).

pub mod error;
pub mod experiment;
pub mod fractal;
pub mod gst;
pub mod levy;
pub mod path;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
