//! Cut-tree transforms of random trees under Poisson edge cutting, their
//! exact and asymptotic inversion, and the Monte Carlo machinery used to
//! check the associated distributional identities.
//!
//! The pipeline is
//! [`generate`] → [`fragment`] → [`cuttree`] → [`invert`], with [`rde`]
//! supplying the Mittag-Leffler reference laws, [`aggregate`] the
//! genealogy-driven aggregation model, and [`stats`] the hypothesis tests.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod acceptance;
pub mod aggregate;
pub mod cli;
pub mod cuttree;
mod error;
pub mod fragment;
pub mod generate;
pub mod invert;
pub mod rde;
pub mod stats;
pub mod trees;
mod unionfind;

pub use error::{Error, Result};
pub use generate::RngStream;
