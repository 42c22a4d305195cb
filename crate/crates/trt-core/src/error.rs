//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by the core numerics.
///
/// Everything here is an input-validation failure of some kind; the
/// numerical routines themselves are total once their preconditions hold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix dimension was zero or larger than the supported maximum.
    #[error("matrix dimension {rows}x{cols} outside supported range 1..={max}")]
    InvalidDimension { rows: usize, cols: usize, max: usize },

    /// An antenna count was zero or larger than the supported maximum.
    #[error("antenna count m={m}, n={n} outside supported range 1..={max}")]
    InvalidAntennas { m: u32, n: u32, max: u32 },

    /// SNR must be strictly positive (and finite) in linear units.
    #[error("SNR rho={0} must be positive and finite")]
    InvalidSnr(f64),

    /// Rates are measured in bits per channel use and must be nonnegative.
    #[error("rate {0} bpcu must be nonnegative and finite")]
    InvalidRate(f64),

    /// The power-split divisor must be strictly positive.
    #[error("power split {0} must be positive and finite")]
    InvalidPowerSplit(f64),

    /// Level index `k` outside the range valid for the scheme at hand.
    #[error("level k={k} outside valid range 0..{limit}")]
    LevelOutOfRange { k: u32, limit: u32 },

    /// Scheme parameters that violate the scheme's own constraints.
    #[error("invalid scheme parameters: {0}")]
    InvalidScheme(&'static str),

    /// Multiplexing ratio incompatible with the requested operating level.
    #[error("ratio {ratio} lies outside the open interval ({lo}, {hi}) for level k={k}")]
    RatioOutOfRegion { ratio: f64, k: u32, lo: f64, hi: f64 },

    /// Region-classification threshold must satisfy `0 < delta < 1`.
    #[error("delta {0} must lie strictly between 0 and 1")]
    InvalidDelta(f64),

    /// A curve query that needs more usable points than were supplied.
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),

    /// A probability level that the measured curve never crosses.
    #[error("level {level} is not bracketed by the curve's usable points")]
    LevelNotBracketed { level: f64 },

    /// Catch-all for scalar arguments that violate a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
