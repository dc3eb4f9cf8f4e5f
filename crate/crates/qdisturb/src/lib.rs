//! Finite-dimensional quantum observables (POVMs), measurement instruments,
//! and disturbance analysis.
//!
//! The crate models discrete observables and instruments, decides structural
//! relations between pairs (commutativity, joint measurability,
//! non-disturbance, repeatability), and quantifies the least possible
//! disturbance an observable's measurement inflicts on another via a
//! semidefinite program with machine-checkable dual certificates.

// Index-driven loops mirror the matrix formulas throughout the numeric
// kernels.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod disturbance;
pub mod document;
pub mod fixtures;
pub mod instruments;
pub mod matrix;
pub mod observables;
pub mod sdp;
pub mod tol;

pub use matrix::{ComplexMatrix, MatrixError};
pub use observables::{Observable, ObservableError};
