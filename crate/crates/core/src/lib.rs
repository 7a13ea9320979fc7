//! Sharp constants and ground states of critical Hardy–Sobolev systems
//!
//! ```text
//! -Δu - λ|u|^{p-2}u/|x|^s = κα|u|^{α-2}u|v|^β/|x|^s
//! -Δv - μ|v|^{p-2}v/|x|^s = κβ|u|^α|v|^{β-2}v/|x|^s,     p = 2*(s) = α + β
//! ```
//!
//! The crate works at desk scale on log-spaced radial grids. It covers
//! the exponent arithmetic, singular-weight quadrature, the best Young
//! coupling constant, the one-dimensional fiber map `g(t)` whose infimum
//! gives the sharp constant, the regime classification of extremals,
//! explicit construction and verification of ground-state pairs, the
//! `a_ε`-regularized minimization problem and calculus on cone-indexed
//! constants.
//!
//! Sweeps and randomized batches run through [`par`], which uses rayon
//! when the `parallel` feature is enabled (the default) and plain
//! iterators otherwise.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cones;
pub mod coupling;
mod descent;
pub mod error;
pub mod exponents;
pub mod fiber;
pub mod format;
pub mod groundstate;
pub mod par;
pub mod radial;
pub mod regime;

pub use error::{Error, Result};
