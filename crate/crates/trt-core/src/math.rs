//! Float routines routed through `std` or `libm` depending on features.
//!
//! Only the handful of transcendental functions the crate actually uses are
//! wrapped here; everything else on `f64` comes straight from `core`.

#[cfg(feature = "std")]
mod imp {
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    pub fn expm1(x: f64) -> f64 {
        x.exp_m1()
    }
    pub fn log2(x: f64) -> f64 {
        x.log2()
    }
    pub fn log10(x: f64) -> f64 {
        x.log10()
    }
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
    pub fn ceil(x: f64) -> f64 {
        x.ceil()
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    pub fn expm1(x: f64) -> f64 {
        libm::expm1(x)
    }
    pub fn log2(x: f64) -> f64 {
        libm::log2(x)
    }
    pub fn log10(x: f64) -> f64 {
        libm::log10(x)
    }
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    pub fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }
}

pub use imp::{abs, ceil, exp, expm1, ln, log10, log2, powf, sqrt};

/// Linear SNR from a dB value: `rho = 10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    powf(10.0, db / 10.0)
}

/// dB value of a linear SNR: `10 * log10(rho)`.
pub fn linear_to_db(rho: f64) -> f64 {
    10.0 * log10(rho)
}
