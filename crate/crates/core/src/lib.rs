//! Linearization of binary quadratic programs.
//!
//! The crate decides whether a quadratic shortest path (QSPP) cost matrix on a
//! directed acyclic graph is linearizable, computes the spanning set of all
//! linearizable matrices, and evaluates the family of linearization-based
//! lower bounds (Gilmore-Lawler, generalized Gilmore-Lawler, the symmetrized
//! linearization bound, first-level RLT and the spanning-set bound) for
//! general binary quadratic programs `min { x^T Q x : Bx = b, x binary }`.

pub mod bounds;
mod error;
pub mod exactnum;
pub mod graph;
pub mod io;
pub mod lp;
pub mod model;
pub mod qspplin;

pub use error::{Error, Result};
pub use exactnum::{Rational, RationalMatrix, RationalVector, Scalar};
