//! Uplink massive-MIMO rate analysis over Ricean fading.
//!
//! The crate generates Ricean channels with a line-of-sight steering part,
//! estimates them from orthogonal pilots with MMSE, measures MRC and ZF
//! rates by Monte Carlo and compares them with closed-form approximations
//! and large-array limits.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod linalg;
pub mod rates;
pub mod rng;
pub mod stats;
pub mod units;

pub use error::{Error, Result};
