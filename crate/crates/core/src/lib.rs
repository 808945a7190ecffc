//! Projectively equivalent 2D pseudo-Riemannian metrics and their quadratic
//! geodesic integrals.
//!
//! The crate covers four jobs:
//!
//! * generating the three normal-form families (Liouville, complex-Liouville,
//!   Jordan block) as metric pairs `(g, ḡ)` and integrals `F`
//!   ([`normal_forms`]),
//! * classifying an arbitrary metric pair pointwise through the eigenstructure
//!   of `G = g⁻¹ ḡ` ([`geometry`]),
//! * checking that a quadratic form is a first integral of a geodesic flow,
//!   both through the Poisson bracket and through the PDE system in null
//!   coordinates ([`dynamics`], [`equivalence`]),
//! * recovering normal-form data from a metric and an integral by explicit
//!   coordinate rectification ([`rectify`]).
//!
//! All metric and integral coefficients are written in a small expression
//! language ([`expr`]) and evaluated with exact second-order derivatives.

// `!(v > 0.0)` is used on purpose so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod equivalence;
pub mod error;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod normal_forms;
pub mod quadrature;
pub mod rectify;

pub use error::{Axis, DomainError, Error, ParseError, Result};
pub use field::{QuadraticForm, ScalarField};
pub use geometry::{Chart, Metric2};
