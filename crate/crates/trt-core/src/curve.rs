//! Estimated outage curves: closed forms, slopes, spacings, regions.
//!
//! A "curve" here is a sequence of measured points `(snr_db, p_hat)` with
//! confidence intervals, one rate per curve.  This module extracts the
//! geometry the predictions speak about (local slopes on the log-log
//! plot, horizontal spacings between curves at a fixed outage level)
//! with uncertainty-aware weighting, plus the exact closed-form curves
//! available for the scalar channel and orthogonal designs.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::predict::{classify_region, RegionKind};

/// Points with fewer hits than this carry too little information and are
/// flagged.
pub const FLAG_MIN_HITS: u64 = 20;

/// Points whose confidence half-width exceeds this fraction of the
/// estimate are flagged.
pub const FLAG_MAX_REL_HALF_WIDTH: f64 = 0.25;

/// One measured point of an outage curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    /// Estimated outage probability.
    pub p_hat: f64,
    /// Lower confidence bound on the probability.
    pub ci_low: f64,
    /// Upper confidence bound on the probability.
    pub ci_high: f64,
    pub hits: u64,
    pub samples: u64,
}

impl CurvePoint {
    /// True when the point is too uncertain to use in fits: fewer than
    /// [`FLAG_MIN_HITS`] hits, or a confidence half-width above
    /// [`FLAG_MAX_REL_HALF_WIDTH`] of the estimate.
    pub fn is_flagged(&self) -> bool {
        if self.hits < FLAG_MIN_HITS {
            return true;
        }
        let half = 0.5 * (self.ci_high - self.ci_low);
        self.p_hat <= 0.0 || half > FLAG_MAX_REL_HALF_WIDTH * self.p_hat
    }

    /// Representative `log10` probability: the estimate when hits exist,
    /// otherwise the upper confidence bound (an upper limit, never a
    /// claim of zero).
    pub fn log10_p(&self) -> f64 {
        if self.hits > 0 {
            math::log10(self.p_hat)
        } else {
            math::log10(self.ci_high)
        }
    }

    /// Inverse-variance weight for least squares, with the standard
    /// deviation taken as half the confidence width in `log10` units.
    /// Zero-hit points get weight zero: they only bound the curve.
    pub fn weight(&self) -> f64 {
        if self.hits == 0 || self.ci_low <= 0.0 || self.ci_high <= self.ci_low {
            return 0.0;
        }
        let sigma = 0.5 * (math::log10(self.ci_high) - math::log10(self.ci_low));
        if sigma <= 0.0 {
            return 0.0;
        }
        1.0 / (sigma * sigma)
    }
}

/// Result of a weighted straight-line fit over a SNR window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    /// Decades of outage probability lost per decade of SNR (positive
    /// for decaying curves).
    pub slope: f64,
    /// Standard error of the slope under the per-point variances.
    pub stderr: f64,
    pub points_used: usize,
    pub window_db: (f64, f64),
}

/// Weighted least-squares slope of `log10 p` against `log10 rho` over the
/// closed SNR window `(lo_db, hi_db)`, sign-flipped so decaying curves
/// report positive slope.
///
/// Flagged points are excluded; at least two usable points at distinct
/// SNRs are required.
pub fn local_slope(points: &[CurvePoint], window_db: (f64, f64)) -> Result<SlopeEstimate> {
    let (lo, hi) = window_db;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument("slope window must satisfy lo < hi"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for p in points {
        if p.snr_db < lo || p.snr_db > hi || p.is_flagged() {
            continue;
        }
        let w = p.weight();
        if w <= 0.0 {
            continue;
        }
        // Decades of SNR, so the fitted slope is already per-decade.
        xs.push(p.snr_db / 10.0);
        ys.push(p.log10_p());
        ws.push(w);
    }
    let w_sum: f64 = ws.iter().sum();
    if xs.len() < 2 || w_sum <= 0.0 {
        return Err(Error::InsufficientData(
            "slope window holds fewer than two usable points",
        ));
    }
    let x_bar: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / w_sum;
    let y_bar: f64 = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / w_sum;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        let dx = xs[i] - x_bar;
        sxx += ws[i] * dx * dx;
        sxy += ws[i] * dx * (ys[i] - y_bar);
    }
    if sxx <= 0.0 {
        return Err(Error::InsufficientData(
            "slope window needs two distinct SNR values",
        ));
    }
    Ok(SlopeEstimate {
        slope: -(sxy / sxx),
        stderr: math::sqrt(1.0 / sxx),
        points_used: xs.len(),
        window_db,
    })
}

/// Horizontal gap between two curves at a fixed outage level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingEstimate {
    /// `snr_b - snr_a` at the level: positive when curve `b` needs more
    /// SNR to reach the same outage probability.
    pub spacing_db: f64,
    pub level: f64,
    pub snr_a_db: f64,
    pub snr_b_db: f64,
    pub rate_a: f64,
    pub rate_b: f64,
}

impl SpacingEstimate {
    /// A higher rate should cost SNR; a negative spacing with increasing
    /// rates signals a measurement inconsistency.
    pub fn is_anomalous(&self) -> bool {
        (self.rate_b > self.rate_a && self.spacing_db < 0.0)
            || (self.rate_b < self.rate_a && self.spacing_db > 0.0)
    }
}

/// SNR (in dB) at which a measured curve crosses `level`, by linear
/// interpolation of `log10 p` between the first pair of adjacent
/// unflagged points that brackets the level on the way down.
pub fn crossing_snr_db(points: &[CurvePoint], level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument("level must lie in (0, 1)"));
    }
    let y_level = math::log10(level);
    let mut usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.is_flagged())
        .map(|p| (p.snr_db, p.log10_p()))
        .collect();
    usable.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("SNR values are finite"));
    for pair in usable.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        if y0 >= y_level && y_level >= y1 {
            if y0 == y1 {
                return Ok(x0);
            }
            return Ok(x0 + (y0 - y_level) / (y0 - y1) * (x1 - x0));
        }
    }
    Err(Error::LevelNotBracketed { level })
}

/// Horizontal spacing `snr_b - snr_a` between two curves at an outage
/// level, tagged with the rates the curves were measured at.
pub fn spacing_at_level(
    curve_a: &[CurvePoint],
    curve_b: &[CurvePoint],
    level: f64,
    rates: (f64, f64),
) -> Result<SpacingEstimate> {
    let snr_a_db = crossing_snr_db(curve_a, level)?;
    let snr_b_db = crossing_snr_db(curve_b, level)?;
    Ok(SpacingEstimate {
        spacing_db: snr_b_db - snr_a_db,
        level,
        snr_a_db,
        snr_b_db,
        rate_a: rates.0,
        rate_b: rates.1,
    })
}

/// Walk a SNR grid and report each operating-region change as
/// `(snr_db, new_region)`, including the first point's label.
pub fn region_transitions(
    m: u32,
    n: u32,
    rate: f64,
    snr_grid_db: &[f64],
    delta: f64,
) -> Result<Vec<(f64, RegionKind)>> {
    if snr_grid_db.is_empty() {
        return Err(Error::InvalidArgument("SNR grid is empty"));
    }
    if !snr_grid_db.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("SNR grid must ascend strictly"));
    }
    let mut out = Vec::new();
    let mut last: Option<RegionKind> = None;
    for &db in snr_grid_db {
        let label = classify_region(m, n, rate, math::db_to_linear(db), delta)?;
        if last != Some(label.kind) {
            out.push((db, label.kind));
            last = Some(label.kind);
        }
    }
    Ok(out)
}

/// Exact outage probability of the single-antenna Rayleigh channel:
/// `1 - exp(-(2^R - 1) / rho)`, computed via `expm1` so deep tails keep
/// full precision.
///
/// # Panics
/// If `rate` is not positive and finite or `rho` is not positive.
pub fn siso_exact(rate: f64, rho: f64) -> f64 {
    assert!(rate > 0.0 && rate.is_finite(), "rate must be positive");
    assert!(rho > 0.0 && rho.is_finite(), "rho must be positive");
    let x = (math::powf(2.0, rate) - 1.0) / rho;
    -math::expm1(-x)
}

/// Regularized lower incomplete gamma `P(a, x)` for positive integer `a`,
/// by series expansion for `x < a + 1` and a continued fraction
/// otherwise.
///
/// # Panics
/// If `a == 0`, `a > 512`, or `x` is negative or non-finite.
pub fn regularized_lower_gamma(a: u32, x: f64) -> f64 {
    assert!((1..=512).contains(&a), "shape parameter out of range");
    assert!(x >= 0.0 && x.is_finite(), "x must be non-negative");
    if x == 0.0 {
        return 0.0;
    }
    let af = a as f64;
    // ln Gamma(a) = ln (a-1)!
    let ln_gamma: f64 = (2..a).map(|i| math::ln(i as f64)).sum();
    let ln_prefix = af * math::ln(x) - x - ln_gamma;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 1000;
    if x < af + 1.0 {
        // P(a, x) = x^a e^-x / Gamma(a) * sum_{n>=0} x^n / (a (a+1) ... (a+n))
        let mut ap = af;
        let mut del = 1.0 / af;
        let mut sum = del;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if math::abs(del) < math::abs(sum) * EPS {
                break;
            }
        }
        sum * math::exp(ln_prefix)
    } else {
        // Q(a, x) via the Lentz continued fraction, then P = 1 - Q.
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - af;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -(i as f64) * (i as f64 - af);
            b += 2.0;
            d = an * d + b;
            if math::abs(d) < TINY {
                d = TINY;
            }
            c = b + an / c;
            if math::abs(c) < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if math::abs(del - 1.0) < EPS {
                break;
            }
        }
        1.0 - math::exp(ln_prefix) * h
    }
}

/// Exact outage probability of a rate-`k/l` orthogonal design over an
/// `m x n` Rayleigh channel: the squared Frobenius norm of the channel is
/// Erlang with shape `mn`, so
/// `P_out = P(mn, m (2^{(l/k) R} - 1) / rho)`.
pub fn orthogonal_exact(m: u32, n: u32, l: u32, k: u32, rate: f64, rho: f64) -> Result<f64> {
    if m == 0 || n == 0 || m > 16 || n > 16 {
        return Err(Error::InvalidAntennas { m, n, max: 16 });
    }
    if l == 0 || k == 0 || k > l {
        return Err(Error::InvalidScheme(
            "orthogonal design needs 1 <= k <= l symbols per block",
        ));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidRate(rate));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidSnr(rho));
    }
    let rate_eff = (l as f64 / k as f64) * rate;
    let x = m as f64 * (math::powf(2.0, rate_eff) - 1.0) / rho;
    Ok(regularized_lower_gamma(m * n, x))
}
