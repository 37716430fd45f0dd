//! Mean-field statics of reverse annealing for the fully connected
//! ferromagnetic p-spin model: free-energy landscapes, self-consistent
//! magnetization branches, first/second-order transition lines on the
//! (s, lambda) plane, and finite-N / rotor-model cross-checks.

pub mod config;
pub mod ed;
pub mod error;
pub mod mf;
pub mod model;
pub mod nonstoq;
pub mod output;
pub mod phase;
pub mod quad;
pub mod solver;
pub mod svmc;

pub use error::{Error, Result};
pub use model::{AnnealPoint, Beta, FieldDistribution, ModelSpec, SiteClass};
pub use solver::{Branch, BranchSource, SolverConfig};
