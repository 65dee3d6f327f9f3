//! Weighted relative-entropy stability of discontinuities for one-dimensional
//! systems of conservation laws.
//!
//! The crate is organised bottom up: [`entropy`] holds the system interface
//! and relative quantities, [`models`] the bundled systems, [`wave_curves`]
//! shock and rarefaction curves, [`criteria`] the weighted stability checks and
//! certificates, and [`sim`] a finite-volume experiment with a moving shift.

pub mod entropy;
pub mod error;
pub mod models;
pub mod numerics;
pub mod criteria;
pub mod sim;
pub mod wave_curves;

pub use entropy::{state, State, SystemModel};
pub use error::{Error, Result};
pub use models::ModelSpec;
