//! Exact-arithmetic laboratory for finitely supported Banach-space vectors.
//!
//! Everything here operates on elements of `c_00` (finitely supported rational
//! sequences) and keeps arithmetic exact wherever the ambient norm allows it:
//! the sup norm, the `l1` norm and the Tsirelson norm are rational-valued on
//! rational input, while general `lp` norms are reported as certified rational
//! enclosures with caller-supplied width.
//!
//! The main entry points:
//!
//! * [`vector`] — [`FiniteVector`], [`IndexSet`], [`NormSpace`] and the
//!   elementary norms.
//! * [`tsirelson`] — exact evaluation of the implicitly defined Tsirelson
//!   norm, its defining iterates, and admissible-family enumeration.
//! * [`certify`] — certified two-sided equivalence constants against the
//!   `lp`/`c0` unit bases, epsilon-type checks and block-representation search.
//! * [`dividing`] — finite-depth checkers for the order property,
//!   independence and strict-order patterns, plus the `l1(Z)` convolution
//!   formula.
//! * [`probe`] — ball nets, trivial-type evaluation and d-metric packing
//!   statistics.
//! * [`report`] — canonical (byte-stable) JSON serialization for reports.

pub mod ambient;
pub mod certify;
pub mod convolution;
pub mod dividing;
pub mod enclosure;
pub mod probe;
pub mod report;
pub mod roots;
pub mod simplex;
pub mod tsirelson;
pub mod vector;

pub use ambient::{ambient_norm, ambient_norm_value, NormError, NormValue};
pub use enclosure::Enclosure;
pub use vector::{FiniteVector, IndexSet, NormSpace, Rat, VectorError};

use num_bigint::BigInt;

/// Shorthand for building an exact rational from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for an integer-valued rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}
