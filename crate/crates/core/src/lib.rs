//! Mixed upwind discontinuous Galerkin discretization of strongly anisotropic
//! heat flux on extruded prism meshes, together with the block-triangular
//! transport solver (AIR algebraic multigrid inner solves) and the classical
//! Schur-complement comparison solver.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line driver and the sparse direct solver live in the `anisoheat` crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod amg;
pub mod assembly;
pub mod blocksolve;
pub mod dense;
mod error;
pub mod krylov;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod space;
pub mod sparse;
pub mod spectra;
pub mod timeloop;

pub use error::{Error, Result};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
