//! Scalar rings and dense linear algebra over them.
//!
//! Exact ranks come from modular elimination over a prime field or from
//! fraction-free elimination over the rationals; complex matrices only get a
//! singular-value based numerical rank.

mod field;
mod matrix;
pub mod primes;

pub use field::{ComplexField, Field, PrimeField, Rationals, ScalarRing, MERSENNE_31};
pub use matrix::{span_dimension, Matrix};
