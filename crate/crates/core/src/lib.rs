//! Horizontal minimal graphs `y = g(x_1, .., x_{n-1}, t)` in `H^n x R`.
//!
//! The crate is organised around the epsilon-horizontal minimal equation
//! `M_eps(g) = 0`, a quasilinear elliptic PDE for the horizontal length `g > 0`:
//!
//! - [`geometry`]: domains, boundary data and the width/radius quantities
//!   every estimate is parameterised by.
//! - [`operator`]: pointwise kernels (residual, coefficient matrix, fundamental
//!   forms, mean curvature) for general `n`, plus the planar Jacobian row.
//! - [`analytic`]: closed-form solutions, sub- and supersolutions, hyperbolic
//!   rescaling, boundary barriers and the global gradient constant.
//! - [`solver`]: finite-difference damped Newton for `n = 2` with the
//!   `s`-homotopy and `eps -> 0` continuation, and a Euclidean minimal-graph
//!   solver used for boundary extensions.
//! - [`estimates`]: checks each a priori bound against a computed field.
//! - [`io`]: problem documents, CSV fields and JSON reports.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod error;
pub mod estimates;
pub mod geometry;
pub mod io;
pub mod operator;
pub mod solver;

pub use error::{Error, Result};
