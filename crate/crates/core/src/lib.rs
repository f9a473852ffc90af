//! Numerics for simulating excitation energy transfer in N-site exciton
//! systems with the hierarchical equations of motion (HEOM), and for
//! forecasting the resulting site-population series with Box–Jenkins
//! ARIMA models fitted from scratch.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the sweep
//! runner, benchmarks and the command line live in the `heomcast` crate.
//!
//! Internal working units are angular frequency in rad·ps⁻¹ and time in ps
//! with ħ = 1. Energies given in cm⁻¹ are converted at the boundary through
//! [`UnitSystem`].

#![no_std]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod forecast;
pub mod heom;
pub mod hierarchy;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod units;

pub use error::{Error, Result};
pub use matrix::CMatrix;
pub use model::{BathSpec, SystemSpec};
pub use units::UnitSystem;

/// Double precision complex scalar used for density matrices.
pub type C64 = num_complex::Complex64;
