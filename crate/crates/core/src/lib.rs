//! Finite-lattice laboratory for the equivalence between Sobolev
//! inequalities and CLR / Lieb–Thirring eigenvalue bounds.
//!
//! A [`lattice::LatticeSpace`] plays the role of the measure space, kinetic
//! operators are built in [`operators`], their spectra and semigroups are
//! computed in [`spectra`], constants in [`functional`], and [`verify`]
//! turns all of it into pass/fail verdicts.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod exponents;
pub mod functional;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod quad;
pub mod special;
pub mod spectra;
pub mod verify;

pub use error::{LabError, Result};
