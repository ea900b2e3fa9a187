//! Quantum max-flow and quantum min-cut for translation-invariant matrix
//! product states on the cycle `C_m`.
//!
//! * [`mps`] contracts a repeated site tensor around the cycle and flattens
//!   the resulting state.
//! * [`qflow`] estimates the maximal flattening rank by generic sampling and
//!   builds the special site tensors (diagonal, shift, IMM, line).
//! * [`qcut`] computes the quantum min-cut of the extended graph.
//! * [`symmetry`] decomposes the odd/even flattening along the eigenspaces
//!   of the cyclic shift and derives the parity bounds.
//! * [`line_kernel`] holds the bond-dimension-two kernel construction.
//! * [`report`] and [`cache`] back the `qmfcut` command-line tool.

pub mod cache;
pub mod counting;
pub mod error;
pub mod line_kernel;
pub mod mps;
pub mod qcut;
pub mod qflow;
pub mod report;
pub mod scalars;
pub mod symmetry;

pub use error::{Error, Result};
pub use scalars::{ComplexField, Field, Matrix, PrimeField, Rationals, ScalarRing};
