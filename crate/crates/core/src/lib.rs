//! Operator norms of L-matrices and C-matrices on `l^p` sequence spaces.
//!
//! The crate evaluates closed-form bounds ([`analytic`]), estimates norms of
//! principal truncations with matrix-free power iterations ([`normest`]),
//! builds explicit lower-bound vectors and certifies their Rayleigh quotients
//! ([`witness`]), and combines both into verdict tables for the critical
//! shift ([`critical`]). The [`cli`] module backs the `lnorm` binary.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod critical;
pub mod error;
pub mod generators;
pub mod normest;
pub mod special;
pub mod summation;
pub mod witness;

pub use error::{Error, Result};
pub use generators::{GeneratorSequence, Shape, StructuredMatrix, TruncatedVector};
pub use normest::{NormEstimate, PowerOptions};
