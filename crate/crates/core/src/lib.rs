//! Dyadic Haar shift, harmonic functions on the disc and the planar dyadic
//! walk whose stopped martingales converge to conjugate harmonic pairs.

pub mod acceptance;
pub mod circle;
pub mod config;
pub mod error;
pub mod experiments;
pub mod haar;
pub mod martingale;
pub mod presets;
pub mod report;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
