//! Pseudo-spectral simulation of 2-D periodic compressible and inhomogeneous
//! incompressible Navier-Stokes flows, with exponential-decay diagnostics and
//! functional-inequality witnesses.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cns;
pub mod diagnostics;
pub mod error;
pub mod ins;
pub mod linear;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod viscous;

pub use error::{Error, Result};
