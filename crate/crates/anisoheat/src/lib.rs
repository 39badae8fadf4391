//! File formats, the sparse direct solver and the experiment driver for the
//! anisoheat discretization.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod io;
pub mod lu;
pub mod studies;
