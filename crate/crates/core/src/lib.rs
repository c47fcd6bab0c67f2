//! Proper scoring rules (logarithmic score, CRPS) and their corrections for
//! verification data observed with error.
//!
//! Three noise models are covered: additive Gaussian error ([`models::ModelA`]),
//! multiplicative inverse-gamma error on a gamma truth ([`models::ModelB`]) and
//! a multivariate error-in-variables system ([`models::EivModel`]) in which
//! both the observation and an auxiliary forecast are noisy copies of the
//! hidden truth.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; Monte Carlo work is driven by [`distributions::RngSeed`]
//! and reproduces bit-exactly for a given seed.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod linalg;

pub mod distributions;
pub mod experiments;
pub mod models;
pub mod numerics;
pub mod score_laws;
pub mod scores;

pub use error::{Error, Result};
