//! Continuous measurement of a two-level atom by traveling-wave light.
//!
//! Master-equation models for a resonant coherent probe, a single-photon
//! pulse, a large Fock pulse and an off-resonant Faraday (QND) probe, each
//! paired with exact coarse-grained slice-by-slice evolution to check it.

pub mod coherent;
pub mod error;
pub mod faraday;
pub mod fock;
pub mod params;
pub mod quantum;
pub mod scenario;
pub mod single_photon;

pub use error::{Error, Result};
