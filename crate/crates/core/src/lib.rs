//! Thermal radiation, thermal Casimir pressure and hyperfine transition rates
//! inside a planar metallic cavity.
//!
//! Public functions take and return SI quantities (m, rad/s, K, J/m^3, Pa,
//! s^-1) except magnetic fields, which are in gauss. Internally the
//! computations run in Gaussian units; see [`units`].

pub mod beam;
pub mod casimir;
pub mod error;
pub mod greens;
pub mod hyperfine;
pub mod materials;
pub mod quadrature;
pub mod special;
pub mod spectra;
mod thermal;
pub mod units;

pub use error::{Error, Result};
pub use greens::{CavitySetup, GreenCoefficients, Mirror};
pub use materials::{MaterialModel, ModelKind, ReflectionPair};
pub use quadrature::{Estimate, QuadratureSpec};
pub use spectra::{EnergyDensityResult, Field, Polarization, SpectralFilter};

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
