#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Boundary- and gluing-corrected graph Laplacians on epsilon-nets, with
//! reference spectra for a catalog of flat model spaces.

pub mod error;
pub mod exec;
pub mod geometry;
pub mod harness;
pub mod laplacian;
pub mod operators;
pub mod oracle;
pub mod sampling;
pub mod sparse;
pub mod spatial;
pub mod spectra;

pub use error::{Error, Result};
pub use exec::Exec;
