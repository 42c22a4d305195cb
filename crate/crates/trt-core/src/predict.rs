//! Analytic predictions for outage-curve geometry.
//!
//! In the high-SNR regime the outage probability of an `m x n` link obeys
//! `log2 P_o ~ c(k) * R - g(k) * log2(rho)` inside the operating region
//! `k < R / log2(rho) < k + 1`.  This module provides:
//!
//! * the diversity-multiplexing curve and its piecewise evaluation,
//! * the `(c, g, t)` coefficient tables for each transmission scheme,
//! * operating-region classification with a tunable smallness threshold,
//! * predicted slopes (decades per 10 dB) and horizontal curve spacings,
//! * a grid/vertex oracle for the underlying linear-program supremum, used
//!   to cross-check the closed-form coefficients.
//!
//! Predicted lines have an unknown additive constant, so consumers compare
//! slopes and spacings only, never absolute levels.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::MAX_DIM;
use crate::scheme::Scheme;

/// `10 * log10(2)`: the dB step that doubles a linear quantity.  The
/// colloquial "3 dB" is always this exact value internally.
pub const DB_PER_OCTAVE: f64 = 10.0 * core::f64::consts::LOG10_2;

fn check_antennas(m: u32, n: u32) -> Result<()> {
    if m == 0 || n == 0 || m > MAX_DIM as u32 || n > MAX_DIM as u32 {
        return Err(Error::InvalidAntennas {
            m,
            n,
            max: MAX_DIM as u32,
        });
    }
    Ok(())
}

/// Diversity-multiplexing tradeoff curve: the piecewise-linear function
/// joining the integer points `(k, (m-k)(n-k))` for `k = 0..min(m, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmtCurve {
    m: u32,
    n: u32,
    vertices: Vec<(u32, u32)>,
}

/// Build the tradeoff curve for an `m x n` configuration.
pub fn dmt_curve(m: u32, n: u32) -> Result<DmtCurve> {
    check_antennas(m, n)?;
    let kmax = m.min(n);
    let vertices = (0..=kmax).map(|k| (k, (m - k) * (n - k))).collect();
    Ok(DmtCurve { m, n, vertices })
}

impl DmtCurve {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Integer vertices `(k, d(k))`, ascending in `k`.
    pub fn vertices(&self) -> &[(u32, u32)] {
        &self.vertices
    }

    /// Diversity gain at real multiplexing gain `r` by piecewise-linear
    /// interpolation between the integer vertices.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let kmax = self.m.min(self.n) as f64;
        if !r.is_finite() || r < 0.0 || r > kmax {
            return Err(Error::InvalidArgument(
                "multiplexing gain outside [0, min(m, n)]",
            ));
        }
        if r == kmax {
            return Ok(0.0);
        }
        let k = r as usize; // floor; r < kmax so k + 1 is a valid vertex
        let (_, d_lo) = self.vertices[k];
        let (_, d_hi) = self.vertices[k + 1];
        let frac = r - k as f64;
        Ok(d_lo as f64 + frac * (d_hi as f64 - d_lo as f64))
    }
}

/// Tradeoff coefficients within one operating region.
///
/// `c` multiplies the rate, `g` multiplies `log2(rho)` (the reliability
/// gain: decades of outage decay per decade of SNR), and `t = g / c` is
/// the throughput gain (bpcu gained per [`DB_PER_OCTAVE`] dB at fixed
/// outage level).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrtCoefficients {
    pub k: u32,
    pub c: f64,
    pub g: f64,
    pub t: f64,
}

/// Coefficients of the capacity-achieving scheme in region `k`:
/// `c = m + n - (2k + 1)`, `g = mn - k(k + 1)`.
pub fn mimo_coefficients(m: u32, n: u32, k: u32) -> Result<TrtCoefficients> {
    check_antennas(m, n)?;
    let kmax = m.min(n);
    if k >= kmax {
        return Err(Error::LevelOutOfRange { k, limit: kmax });
    }
    let c = (m + n - (2 * k + 1)) as f64;
    let g = (m * n - k * (k + 1)) as f64;
    Ok(TrtCoefficients { k, c, g, t: g / c })
}

/// Coefficients plus the operating-region interval, in units of
/// `R / log2(rho)` (multiplexing gain).
///
/// The interval can be empty for the last ARQ region (its lower edge may
/// reach `min(m, n)` exactly); such regions are reported as-is rather
/// than silently dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeCoefficients {
    pub trt: TrtCoefficients,
    /// `(lo, hi)` bounds of the region in `R / log2(rho)`.
    pub region: (f64, f64),
}

impl SchemeCoefficients {
    pub fn is_empty_region(&self) -> bool {
        self.region.0 >= self.region.1
    }
}

/// Per-scheme tradeoff coefficients for region index `k`.
///
/// * `MimoOptimal`: the `mimo_coefficients` table, region `(k, k+1)`.
/// * `VblastMl` (`m == n`): single region `(0, m)` with `c = 1`, `g = m`.
/// * `Orthogonal(l, k_sym)`: single region `(0, k_sym/l)` with
///   `c = (l/k_sym) * m * n`, `g = m * n`.
/// * `ArqLongTermStatic(L)`: region `k` covers `(kL, (k+1)L)` capped at
///   `min(m, n)`, with `c = c_mimo(k) / L` and `g = g_mimo(k)`.
pub fn scheme_coefficients(
    scheme: &Scheme,
    m: u32,
    n: u32,
    k: u32,
) -> Result<SchemeCoefficients> {
    check_antennas(m, n)?;
    scheme.validate()?;
    let kmax = m.min(n);
    match *scheme {
        Scheme::MimoOptimal => {
            let trt = mimo_coefficients(m, n, k)?;
            Ok(SchemeCoefficients {
                trt,
                region: (k as f64, (k + 1) as f64),
            })
        }
        Scheme::VblastMl => {
            if m != n {
                return Err(Error::InvalidScheme("V-BLAST requires m == n"));
            }
            if k != 0 {
                return Err(Error::LevelOutOfRange { k, limit: 1 });
            }
            let g = m as f64;
            Ok(SchemeCoefficients {
                trt: TrtCoefficients {
                    k: 0,
                    c: 1.0,
                    g,
                    t: g,
                },
                region: (0.0, m as f64),
            })
        }
        Scheme::Orthogonal { l, k: k_sym } => {
            if k != 0 {
                return Err(Error::LevelOutOfRange { k, limit: 1 });
            }
            let g = (m * n) as f64;
            let c = (l as f64 / k_sym as f64) * g;
            Ok(SchemeCoefficients {
                trt: TrtCoefficients { k: 0, c, g, t: g / c },
                region: (0.0, k_sym as f64 / l as f64),
            })
        }
        Scheme::ArqLongTermStatic { max_rounds } => {
            let l = max_rounds;
            let k_limit = (kmax / l).min(kmax - 1);
            if k > k_limit {
                return Err(Error::LevelOutOfRange { k, limit: k_limit + 1 });
            }
            let base = mimo_coefficients(m, n, k)?;
            let c = base.c / l as f64;
            let lo = (k * l) as f64;
            let hi = ((k + 1) * l).min(kmax) as f64;
            Ok(SchemeCoefficients {
                trt: TrtCoefficients {
                    k,
                    c,
                    g: base.g,
                    t: base.g / c,
                },
                region: (lo, hi),
            })
        }
    }
}

/// Where a rate/SNR operating point sits relative to the asymptotic
/// regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// Deep inside region `k`: both smallness inequalities hold.
    InRegion(u32),
    /// Between regions: no `k` satisfies both inequalities.
    Transitional,
    /// `R > min(m, n) * log2(rho)`: outside every region; the outage
    /// probability no longer decays with SNR.
    Degenerate,
}

impl core::fmt::Display for RegionKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RegionKind::InRegion(k) => write!(f, "{k}"),
            RegionKind::Transitional => write!(f, "transitional"),
            RegionKind::Degenerate => write!(f, "degenerate"),
        }
    }
}

/// Classification result, remembering the threshold it was made with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionLabel {
    pub kind: RegionKind,
    pub delta: f64,
}

/// Classify an operating point `(R, rho)` for an `m x n` link.
///
/// The point is in region `k` when both `rho^k / 2^R <= delta` and
/// `2^R / rho^(k+1) <= delta`; at most one `k` can win for `delta < 1`.
/// Comparisons run in the log domain so large `rho^k` cannot overflow.
pub fn classify_region(m: u32, n: u32, rate: f64, rho: f64, delta: f64) -> Result<RegionLabel> {
    check_antennas(m, n)?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidRate(rate));
    }
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(Error::InvalidSnr(rho));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let log2_rho = math::log2(rho);
    let log2_delta = math::log2(delta);
    let kmax = m.min(n);
    if rate > kmax as f64 * log2_rho {
        return Ok(RegionLabel {
            kind: RegionKind::Degenerate,
            delta,
        });
    }
    for k in 0..kmax {
        let low_ok = k as f64 * log2_rho - rate <= log2_delta;
        let high_ok = rate - (k + 1) as f64 * log2_rho <= log2_delta;
        if low_ok && high_ok {
            return Ok(RegionLabel {
                kind: RegionKind::InRegion(k),
                delta,
            });
        }
    }
    Ok(RegionLabel {
        kind: RegionKind::Transitional,
        delta,
    })
}

/// Classify an operating point against the region intervals of an
/// arbitrary scheme.
///
/// Each non-empty region `(lo, hi)` of the scheme (in multiplexing-gain
/// units) is tested with the same log-domain smallness rule as
/// [`classify_region`]: `rho^lo / 2^R <= delta` and
/// `2^R / rho^hi <= delta`.  Points with `R` above the largest upper
/// edge times `log2(rho)` are degenerate.  For [`Scheme::MimoOptimal`]
/// this coincides with [`classify_region`].
pub fn classify_scheme_region(
    scheme: &Scheme,
    m: u32,
    n: u32,
    rate: f64,
    rho: f64,
    delta: f64,
) -> Result<RegionLabel> {
    check_antennas(m, n)?;
    scheme.validate()?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidRate(rate));
    }
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(Error::InvalidSnr(rho));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let kmax = m.min(n);
    let region_indices: Vec<u32> = match *scheme {
        Scheme::MimoOptimal => (0..kmax).collect(),
        Scheme::VblastMl | Scheme::Orthogonal { .. } => alloc::vec![0],
        Scheme::ArqLongTermStatic { max_rounds } => {
            (0..=(kmax / max_rounds).min(kmax - 1)).collect()
        }
    };
    let mut intervals: Vec<(u32, (f64, f64))> = Vec::new();
    let mut sup = 0.0f64;
    for &k in &region_indices {
        let sc = scheme_coefficients(scheme, m, n, k)?;
        if !sc.is_empty_region() {
            sup = sup.max(sc.region.1);
            intervals.push((k, sc.region));
        }
    }
    let log2_rho = math::log2(rho);
    let log2_delta = math::log2(delta);
    if rate > sup * log2_rho {
        return Ok(RegionLabel {
            kind: RegionKind::Degenerate,
            delta,
        });
    }
    for (k, (lo, hi)) in intervals {
        if lo * log2_rho - rate <= log2_delta && rate - hi * log2_rho <= log2_delta {
            return Ok(RegionLabel {
                kind: RegionKind::InRegion(k),
                delta,
            });
        }
    }
    Ok(RegionLabel {
        kind: RegionKind::Transitional,
        delta,
    })
}

/// Predicted asymptote `c(k) * R - g(k) * log2(rho)` for `log2 P_o`.
///
/// Degenerate operating points (rate above `min(m,n) * log2 rho`) return
/// zero: the outage probability stops decaying there.  The value may be
/// positive at low SNR; callers treat it as a line, not a probability.
pub fn predict_log2_po(m: u32, n: u32, rate: f64, rho: f64, k: u32) -> Result<f64> {
    let coeffs = mimo_coefficients(m, n, k)?;
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidRate(rate));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidSnr(rho));
    }
    let log2_rho = math::log2(rho);
    if rate > m.min(n) as f64 * log2_rho {
        return Ok(0.0);
    }
    Ok(coeffs.c * rate - coeffs.g * log2_rho)
}

/// Predicted horizontal spacing in dB between two outage curves whose
/// rates differ by `delta_r`, inside the region `coeffs` describes:
/// `(10 log10 2) * delta_r * c / g`.
pub fn predicted_spacing_db(coeffs: &TrtCoefficients, delta_r: f64) -> f64 {
    assert!(
        delta_r > 0.0 && delta_r.is_finite(),
        "spacing needs a positive rate difference"
    );
    DB_PER_OCTAVE * delta_r * coeffs.c / coeffs.g
}

/// Predicted outage-curve slope: `g` decades of probability per decade of
/// SNR (10 dB).
pub fn predicted_slope_per_decade(coeffs: &TrtCoefficients) -> f64 {
    coeffs.g
}

/// Verify the exact identities tying the coefficient tables to the
/// tradeoff curve: with `d'(k+) = d(k+1) - d(k)`,
/// `c(k) == -d'(k+)` and `g(k) == d(k) - k * d'(k+)` for every region.
///
/// All quantities are small integers, so the comparison is exact.
pub fn identity_check(m: u32, n: u32) -> Result<bool> {
    let curve = dmt_curve(m, n)?;
    let v = curve.vertices();
    for k in 0..m.min(n) {
        let coeffs = mimo_coefficients(m, n, k)?;
        let d_k = v[k as usize].1 as f64;
        let d_k1 = v[k as usize + 1].1 as f64;
        let d_prime = d_k1 - d_k;
        if coeffs.c != -d_prime {
            return Ok(false);
        }
        if coeffs.g != d_k - k as f64 * d_prime {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Inputs of the exponent supremum: maximize
/// `f(alpha) = sum_i (|m - n| + 2i - 1) * alpha_i` over ascending-ordered
/// `alpha` with `sum alpha_i <= 1` and `alpha_i <= ratio + epsilon`,
/// where `ratio = log2(rho) / R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentProblem {
    pub m: u32,
    pub n: u32,
    /// `log2(rho) / R` at the operating point.
    pub ratio: f64,
    /// Slack added to the per-coordinate cap.
    pub epsilon: f64,
    /// Grid resolution for the brute-force maximization.
    pub grid_step: f64,
}

/// Largest `min(m, n)` the grid oracle accepts (the search is a dense
/// sweep over a `min(m, n)`-dimensional slice).
pub const EXPONENT_MAX_MIN_ANTENNAS: u32 = 3;

fn validate_exponent(p: &ExponentProblem, k: u32) -> Result<(usize, f64)> {
    check_antennas(p.m, p.n)?;
    let mu = p.m.min(p.n);
    if mu > EXPONENT_MAX_MIN_ANTENNAS {
        return Err(Error::InvalidArgument(
            "exponent oracle supports min(m, n) <= 3",
        ));
    }
    if k >= mu {
        return Err(Error::LevelOutOfRange { k, limit: mu });
    }
    if !(p.ratio > 0.0 && p.ratio.is_finite() && p.epsilon >= 0.0 && p.grid_step > 0.0) {
        return Err(Error::InvalidArgument(
            "exponent problem needs ratio > 0, epsilon >= 0, grid_step > 0",
        ));
    }
    // Operating region k pins the ratio to (1/(k+1) + eps, 1/k - eps).
    let lo = 1.0 / (k + 1) as f64 + p.epsilon;
    let hi = if k == 0 {
        f64::INFINITY
    } else {
        1.0 / k as f64 - p.epsilon
    };
    if !(p.ratio > lo && p.ratio < hi) {
        return Err(Error::RatioOutOfRegion {
            ratio: p.ratio,
            k,
            lo,
            hi,
        });
    }
    Ok((mu as usize, p.ratio + p.epsilon))
}

fn exponent_coefs(m: u32, n: u32, mu: usize) -> [f64; 3] {
    let gap = m.abs_diff(n) as f64;
    let mut coefs = [0.0; 3];
    for (i, c) in coefs.iter_mut().enumerate().take(mu) {
        *c = gap + (2 * (i + 1)) as f64 - 1.0;
    }
    coefs
}

/// Closed-form supremum: `m + n - 1` for `k = 0`, and
/// `[m + n - (2k + 1)] + k(k + 1) * (ratio + epsilon)` for `k >= 1`.
pub fn exponent_sup_closed_form(p: &ExponentProblem, k: u32) -> Result<f64> {
    let (_, cap) = validate_exponent(p, k)?;
    if k == 0 {
        Ok((p.m + p.n - 1) as f64)
    } else {
        Ok((p.m + p.n - (2 * k + 1)) as f64 + (k * (k + 1)) as f64 * cap)
    }
}

/// Supremum by vertex enumeration of the constraint polytope.
///
/// The maximand is linear, so the optimum sits on a vertex; the vertices
/// of the ordered, capped, sum-bounded set are tails of equal entries at
/// the cap (optionally preceded by one remainder entry) or tails of equal
/// entries summing to one.
pub fn exponent_sup_vertices(p: &ExponentProblem, k: u32) -> Result<f64> {
    let (mu, cap) = validate_exponent(p, k)?;
    let coefs = exponent_coefs(p.m, p.n, mu);
    let cap = cap.min(1.0);
    let top_sum = |j: usize| -> f64 { coefs[mu - j..mu].iter().sum() };
    let mut best = 0.0f64;
    for j in 0..=mu {
        // j entries pinned at the cap, rest zero...
        if j as f64 * cap <= 1.0 + 1e-12 {
            let f = cap * top_sum(j);
            best = best.max(f);
            // ...plus one entry absorbing the leftover budget.
            if j < mu {
                let r = 1.0 - j as f64 * cap;
                if r > 0.0 && r <= cap {
                    best = best.max(f + r * coefs[mu - j - 1]);
                }
            }
        }
        // j equal entries that exhaust the budget below the cap.
        if j >= 1 {
            let a = 1.0 / j as f64;
            if a <= cap {
                best = best.max(a * top_sum(j));
            }
        }
    }
    Ok(best)
}

/// Supremum by dense grid search, the independent confirmation of the
/// closed form.
///
/// The candidate set is the uniform grid of `grid_step` multiples plus
/// the handful of values where vertices live (the cap and the leftover
/// budgets `1 - j * cap`), so the analytic optimum is always attainable;
/// the result matches the closed form within
/// `2 * grid_step * sum(coefficients)` as a worst-case bound and to
/// near machine precision in practice.
pub fn exponent_sup_oracle(p: &ExponentProblem, k: u32) -> Result<f64> {
    let (mu, cap) = validate_exponent(p, k)?;
    let coefs = exponent_coefs(p.m, p.n, mu);
    let cap = cap.min(1.0);

    let mut values: Vec<f64> = Vec::new();
    let mut v = 0.0;
    while v < cap {
        values.push(v);
        v += p.grid_step;
    }
    values.push(cap);
    for j in 0..=mu {
        let r = 1.0 - j as f64 * cap;
        if r > 0.0 && r < cap {
            values.push(r);
        }
        if j >= 1 {
            let a = 1.0 / j as f64;
            if a < cap {
                values.push(a);
            }
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let nv = values.len();
    let mut best = 0.0f64;
    // Ascending tuples only: alpha_1 <= ... <= alpha_mu.
    match mu {
        1 => {
            for &a in &values {
                best = best.max(coefs[0] * a);
            }
        }
        2 => {
            for i in 0..nv {
                let a = values[i];
                for &b in &values[i..] {
                    if a + b > 1.0 + 1e-9 {
                        break;
                    }
                    best = best.max(coefs[0] * a + coefs[1] * b);
                }
            }
        }
        3 => {
            for i in 0..nv {
                let a = values[i];
                if a > 1.0 + 1e-9 {
                    break;
                }
                for j in i..nv {
                    let b = values[j];
                    if a + b > 1.0 + 1e-9 {
                        break;
                    }
                    let partial = coefs[0] * a + coefs[1] * b;
                    for &c in &values[j..] {
                        if a + b + c > 1.0 + 1e-9 {
                            break;
                        }
                        best = best.max(partial + coefs[2] * c);
                    }
                }
            }
        }
        _ => unreachable!("validated mu <= 3"),
    }
    Ok(best)
}
