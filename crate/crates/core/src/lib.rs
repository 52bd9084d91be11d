//! Sparse variable selection from horseshoe posterior means.
//!
//! The crate fits a Bayesian linear regression with a horseshoe prior by Gibbs
//! sampling, sparsifies the posterior mean with the signal adaptive variable
//! selector ([`savs::savs`]), and provides the adaptive-lasso coordinate
//! descent the selector is a one-pass approximation of. A simulation harness
//! scores support recovery over random designs.

pub mod cd;
pub mod data;
pub mod error;
pub mod horseshoe;
pub mod linalg;
pub mod manifest;
pub mod metrics;
pub mod rng;
pub mod report;
pub mod savs;
pub mod sim;

pub use error::{Error, Result};
