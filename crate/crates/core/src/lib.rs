//! Verification toolkit for Petrovskii parabolic initial-boundary value
//! problems of second order posed in generalized anisotropic Sobolev spaces
//! `H^{s,s/2;φ}`.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod compatibility;
pub mod config;
pub mod error;
pub mod extension;
pub mod interpolation;
pub mod parabolicity;
pub mod poly;
pub mod run;
pub mod spectral;
pub mod symbols;
pub mod verifier;
pub mod weights;

pub use error::{Error, Result};
