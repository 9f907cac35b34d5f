//! Randomized hyperplane reflections for square linear systems.
//!
//! Reflecting a point through the hyperplane of any row of `A x = b` keeps
//! its distance to the solution fixed, so a random sequence of reflections
//! produces points on a sphere centered at the solution. This crate builds
//! those sequences, recovers the center by averaging or by the Thales
//! linear system, compares against Kaczmarz and Cimmino baselines, and
//! checks the supporting identities and bounds numerically.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod reflection;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod solver;
pub mod sphere;
pub mod stats;
pub mod system;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, SvdResult, Vector};
pub use rng::RngStream;
pub use sampling::RowSampler;
pub use system::LinearSystem;
