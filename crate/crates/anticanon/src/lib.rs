//! Decomposition and simultaneous canonical forms for families of
//! anti-commuting diagonalizable linear operators.
//!
//! Given a finite family of square complex (or real) matrices that pairwise
//! anti-commute and are individually diagonalizable, the vector space splits
//! into an invariant direct sum: the common kernel, subspaces on which a
//! single operator acts (and is nonsingular), and subspaces on which the
//! restricted family is a representation of a Clifford algebra. This crate
//! computes that decomposition numerically, constructs explicit canonical
//! forms on each block, validates the algebraic hypotheses, and ships a
//! test-data generator plus a small CLI for file-based workflows.
//!
//! Start with [`family::OperatorFamily`], then [`decomposition::decompose`]
//! and [`canonical::apply_canonical`]. The `examples/` directory contains
//! one runnable demonstration per capability.

pub mod canonical;
pub mod commands;
pub mod decomposition;
pub mod error;
pub mod family;
pub mod files;
pub mod numerics;
pub mod oracle;
pub mod simdiag;

pub use error::{Error, Result};
pub use numerics::{Mat, Scalar, TolerancePolicy};
