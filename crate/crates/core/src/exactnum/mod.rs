//! Exact rational arithmetic and dense exact linear algebra.

mod matrix;
mod rational;
mod scalar;

pub use matrix::{solve_lower_triangular, RationalMatrix, RationalVector, Rref};
pub use rational::{ParseRationalError, Rational};
pub use scalar::{Scalar, FLOAT_EPS};
