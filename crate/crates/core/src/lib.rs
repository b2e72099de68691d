//! Regularity of diagonal positive definite integral lattices.

pub mod arith;
pub mod classify;
pub mod error;
pub mod fixtures;
pub mod lattice;
pub mod global;
pub mod padic;
pub mod sieve;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{CoefficientVector, DiagonalLattice};
