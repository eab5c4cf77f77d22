//! Spectral asymptotics linking the periodic Toda lattice to Hill's
//! operator and the KdV flow.

pub mod actions;
pub mod asymptotics;
pub mod eigen;
pub mod error;
pub mod hill;
pub mod kdv;
pub mod profiles;
pub mod quadrature;
pub mod quasimodes;
pub mod roots;
pub mod toda;

pub use error::{Error, Result};
pub use profiles::PeriodicProfile;
