//! Quantum steering harvested from the Minkowski vacuum by two static,
//! pointlike Unruh-DeWitt detectors with Gaussian switching and unequal
//! energy gaps.
//!
//! All inputs are dimensionless: gaps are `Omega * sigma`, the separation is
//! `L / sigma`.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod harvest;
pub mod oracle;
pub mod specfun;
pub mod xstate;

pub use error::{Error, Result};
pub use harvest::{DetectorPairParams, PerturbativeState};
pub use specfun::Complex;
pub use xstate::{Direction, JTerms, Regime, SteeringResult, XState};
