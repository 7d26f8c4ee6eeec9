//! Symbolic engine for homogeneous Hamiltonian operators of evolutionary PDE
//! systems: exact jet-space algebra, cotangent coverings, closed-form tensor
//! conditions and undetermined-coefficient searches.

#![allow(clippy::needless_range_loop)]

pub mod covering;
pub mod geometry;
pub mod kernel;
pub mod solver;

pub use kernel::{DiffPoly, KernelError, Rat, RatFunc};
