//! Dense linear-algebra substrate.

pub mod io;
pub mod matrix;
pub mod solve;
pub mod svd;
pub mod vector;

pub use matrix::{frobenius_norm, matvec, DenseMatrix};
pub use solve::solve_direct;
pub use svd::{inverse_operator_norm, singular_values, SvdResult};
pub use vector::Vector;
