//! Case singular-eigenfunction solution of the radiative transport equation
//! in an infinite homogeneous medium: dispersion function and spectrum,
//! eigenfunctions in rotated reference frames, Green's functions, energy
//! densities, and a Monte Carlo cross-check.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
// negated comparisons double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod chandra;
pub mod density;
pub mod eigenfunctions;
pub mod error;
pub mod greens;
pub mod medium;
pub mod montecarlo;
pub mod mrrf;
pub mod quadrature;
pub mod rotation;
pub mod scalar;
pub mod specfun;
pub mod spectrum;

pub use error::{Error, Result};
pub use medium::OpticalMedium;
