//! Binomial interval estimation for rare-event counts.
//!
//! The Monte-Carlo engine stops on a fixed number of hits, so hit counts
//! are often small; the Wilson score interval stays well-behaved there,
//! unlike the normal approximation.  The zero-hit case gets the classic
//! rule-of-three upper bound instead.

use crate::error::{Error, Result};
use crate::math;

/// Two-sided binomial confidence interval for `hits` successes out of
/// `samples` trials, by the Wilson score method.
///
/// Returns `(low, high)` with `0 <= low <= hits/samples <= high <= 1`.
/// `confidence` is the two-sided coverage target, e.g. `0.95`.
pub fn wilson_interval(hits: u64, samples: u64, confidence: f64) -> Result<(f64, f64)> {
    if samples == 0 || hits > samples {
        return Err(Error::InvalidArgument(
            "wilson_interval needs 0 <= hits <= samples with samples > 0",
        ));
    }
    let z = normal_quantile((1.0 + validate_confidence(confidence)?) / 2.0)?;
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * math::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Rule-of-three upper bound on the event probability after `samples`
/// trials with zero hits (95% one-sided).
pub fn rule_of_three(samples: u64) -> f64 {
    assert!(samples > 0, "rule_of_three needs at least one sample");
    3.0 / samples as f64
}

fn validate_confidence(confidence: f64) -> Result<f64> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(confidence)
    } else {
        Err(Error::InvalidArgument(
            "confidence must lie strictly between 0 and 1",
        ))
    }
}

/// Quantile (inverse CDF) of the standard normal distribution.
///
/// Acklam's rational approximation; relative error below `1.2e-9` over
/// the open unit interval, which is far tighter than any statistical use
/// here requires.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(
            "normal quantile defined on the open interval (0, 1)",
        ));
    }

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    let x = if p < P_LOW {
        tail(math::sqrt(-2.0 * math::ln(p)))
    } else if p > 1.0 - P_LOW {
        -tail(math::sqrt(-2.0 * math::ln(1.0 - p)))
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    Ok(x)
}
