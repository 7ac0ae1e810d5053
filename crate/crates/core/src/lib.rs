//! Exact dyadic harmonic analysis on truncated lattices.
//!
//! The crate provides dyadic geometry ([`dyadic`]), step functions and Haar
//! expansions ([`stepfn`]), dyadic shifts and multilinear Haar multipliers,
//! paraproducts and commutators ([`operators`]), BMO and weight
//! diagnostics ([`norms`]), and numerical compactness probes ([`probes`]).

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// coordinate loops index several parallel per-axis arrays
#![allow(clippy::needless_range_loop)]

pub mod dyadic;
pub mod error;
pub mod generators;
mod levels;
pub mod norms;
pub mod operators;
pub mod par;
pub mod probes;
pub mod report;
pub mod rng;
pub mod stepfn;
pub mod weights;

pub use dyadic::{Dyadic, DyadicInterval, HaarFunction, HaarPattern, TruncatedLattice};
pub use error::{DyadError, Result};
pub use operators::{AlphaVector, EpsilonSeq, Exponents, Operator, ShiftSpec, ShiftTerm};
pub use stepfn::{HaarExpansion, StepFunction};
