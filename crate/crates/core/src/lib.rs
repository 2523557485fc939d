//! Three-point vanishing ideals in the bidisk and bounds for their
//! pluricomplex Green functions as the points collapse to the origin.
//!
//! The crate is `no_std` (with `alloc`) and purely computational:
//!
//! - [`cxgeom`]: Hermitian geometry of point triples and the canonical frame
//!   `a1 = 0`, `a2 = (eps, 0)`, `a3 = (rho, delta * rho)`.
//! - [`bipoly`]: sparse bivariate complex polynomials with a certified
//!   sup-norm on the unit bidisk.
//! - [`ideals`]: generators of the vanishing ideal, the line product and the
//!   limit ideals.
//! - [`classify`]: limit regime of a shrinking family of triples.
//! - [`green`]: certified lower and upper bounds for the Green function and
//!   the closed-form limit targets.
//!
//! IO, file formats, sweeps and the command line live in the `plurigreen`
//! crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bipoly;
pub mod classify;
pub mod cxgeom;
mod error;
pub mod green;
pub mod ideals;
pub mod optim;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
