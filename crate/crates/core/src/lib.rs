//! Bandits with knapsacks under approximately stationary adversaries.
//!
//! The crate covers the environment model, the primal-dual Lagrangian
//! algorithm and its restarting variant, the `OPT_FD` benchmark, adversary
//! generators, analytic guarantee curves, and a seeded experiment harness.

pub mod adversaries;
pub mod benchmark;
pub mod bounds;
pub mod env;
pub mod error;
pub mod harness;
pub mod lagrange;
pub mod learners;
pub mod restart;

pub use error::{BwkError, Result};
