//! Core numerics for outage-limited MIMO link analysis.
//!
//! The crate covers four areas:
//!
//! * complex matrix plumbing and reproducible channel sampling
//!   ([`matrix`], [`rng`]),
//! * spectral routines for Gram matrices and mutual information ([`eigen`]),
//! * outage events for concrete transmission schemes ([`scheme`]),
//! * the high-SNR tradeoff predictor and measured-curve geometry
//!   ([`predict`], [`curve`]).
//!
//! Everything here is deterministic: the random-number streams are
//! counter-based, so a `(seed, stream index)` pair fully determines every
//! draw regardless of call order or thread count.  The crate is `no_std`
//! compatible (with `alloc`); enable the `libm` feature instead of `std`
//! to build without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("trt-core needs either the `std` or the `libm` feature for float math");

mod math;

pub mod curve;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod predict;
pub mod rng;
pub mod scheme;
pub mod stats;

pub use error::{Error, Result};
pub use math::{db_to_linear, linear_to_db};

/// Complex scalar type used throughout the matrix APIs.
pub use num_complex::Complex64;
