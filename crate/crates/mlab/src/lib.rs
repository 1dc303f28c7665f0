//! Numerical toolkit for weighted Morrey-space harmonic analysis: dyadic ball
//! families on centered lattices, Muckenhoupt/reverse-Hoelder weight
//! diagnostics, weighted Morrey and BMO norms, generalized fractional
//! integrals of semigroup type with their multilinear commutators and maximal
//! operators, and a check harness that measures norm-inequality ratios across
//! grid refinements.

pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod operators;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
