//! Solver laboratory and hashing toolkit for the contracting hypergrid vector
//! (CHV) problem: given a Gaussian matrix A with m rows and n > m columns,
//! find a nonzero integer vector x with entries in [-B, B] such that
//! `|Ax| < kappa * sqrt(m) * |x|`.
//!
//! The crate bundles the two solvers (online cooling and kernel rounding), an
//! exact small-instance oracle, statistical-threshold calculators, a robust
//! locality-sensitive hash built on rounded random projections, a mod-1
//! distinguisher reduction, numeric verifiers for the finite counting and
//! covering bounds behind the hardness arguments, and a reproducible sweep
//! harness used by the `chv` binary.

pub mod clwe;
pub mod error;
pub mod instance;
pub mod kernel;
pub mod linalg;
pub mod lsh;
pub mod matio;
pub mod online;
pub mod oracle;
pub mod rng;
pub mod special;
pub mod sweep;
pub mod theory;
pub mod thresholds;

pub use error::{Error, Result};
pub use instance::{achieved_ratio, sample_gaussian_matrix, ChvInstance};
pub use rng::{Sampler, Seed};
