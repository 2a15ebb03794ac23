//! Sparse linear regression with the adaptive elastic-net.
//!
//! The crate fits the lasso, elastic-net, adaptive lasso, adaptive elastic-net
//! and SCAD by coordinate descent, tunes them by BIC, screens ultra-high
//! dimensional designs with SIS, and runs reproducible Monte Carlo studies on
//! correlated Gaussian designs.

pub mod adaptive;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod rng;
pub mod screening;
pub mod simulation;
pub mod solver;
pub mod tuning;

pub use data::{CoefficientLaw, Dataset, Design, FitResult, Penalty, Scenario};
pub use error::{Error, Result};
pub use solver::{augmented_oracle_fit, kkt_check, scad_fit, weighted_enet_fit, CoordinateDescent, SolverConfig};
