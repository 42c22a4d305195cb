//! Transmission schemes and their per-realization outage events.
//!
//! Each scheme maps a channel realization `H` plus an operating point
//! `(rho, R)` to a boolean outage event (or, for ARQ, to a round-count
//! outcome).  These predicates are the inner loop of the Monte-Carlo
//! engine, so they avoid heap allocation entirely.

use num_complex::Complex64;

use crate::eigen::{self, column_gram, gram_spectrum, hermitian_eigenvalues, mutual_info_bits};
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::{ComplexMatrix, MAX_DIM};

/// Largest transmit-antenna count for which the per-subset enumeration of
/// the V-BLAST event is allowed (2^m - 1 subsets).
pub const VBLAST_MAX_TX: u32 = 8;

/// Transmission scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Capacity-achieving input on the full MIMO channel.
    MimoOptimal,
    /// Per-antenna independent encoding with joint maximum-likelihood
    /// reception; requires equal antenna counts.
    VblastMl,
    /// Orthogonal space-time block code transmitting `k` symbols over `l`
    /// channel uses (Alamouti is `l = 2, k = 2` on two transmit antennas).
    Orthogonal { l: u32, k: u32 },
    /// Incremental-redundancy ARQ over a long-term static channel with at
    /// most `max_rounds` rounds per message.
    ArqLongTermStatic { max_rounds: u32 },
}

impl Scheme {
    /// Validate the scheme's own parameter invariants.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Scheme::MimoOptimal | Scheme::VblastMl => Ok(()),
            Scheme::Orthogonal { l, k } => {
                if k >= 1 && k <= l {
                    Ok(())
                } else {
                    Err(Error::InvalidScheme("orthogonal code needs 1 <= k <= l"))
                }
            }
            Scheme::ArqLongTermStatic { max_rounds } => {
                if max_rounds >= 1 {
                    Ok(())
                } else {
                    Err(Error::InvalidScheme("ARQ needs at least one round"))
                }
            }
        }
    }
}

/// Antenna configuration: `m` transmit, `n` receive.
///
/// Channel matrices for this configuration have `n` rows and `m` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelSpec {
    m: u32,
    n: u32,
}

impl ChannelSpec {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 || n == 0 || m > MAX_DIM as u32 || n > MAX_DIM as u32 {
            return Err(Error::InvalidAntennas {
                m,
                n,
                max: MAX_DIM as u32,
            });
        }
        Ok(Self { m, n })
    }

    /// Transmit antennas.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Receive antennas.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn min_antennas(&self) -> u32 {
        self.m.min(self.n)
    }

    fn check_dims(&self, h: &ComplexMatrix) -> Result<()> {
        if h.rows() != self.n as usize || h.cols() != self.m as usize {
            return Err(Error::InvalidArgument(
                "channel matrix shape does not match the antenna configuration",
            ));
        }
        Ok(())
    }
}

/// Result of one ARQ message: rounds consumed and delivery status.
///
/// `delivered == false` always comes with `rounds_used == max_rounds`
/// (a failed message occupies the whole round budget).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArqOutcome {
    pub rounds_used: u32,
    pub delivered: bool,
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRate(rate))
    }
}

/// Outage of the capacity-achieving scheme: mutual information at equal
/// per-antenna power falls below the attempted rate.
pub fn mimo_outage(h: &ComplexMatrix, spec: &ChannelSpec, rho: f64, rate: f64) -> Result<bool> {
    spec.check_dims(h)?;
    check_rate(rate)?;
    let info = mutual_info_bits(h, rho, spec.m as f64)?;
    Ok(info < rate)
}

/// V-BLAST outage under joint ML reception, modeled as violation of any
/// multiple-access sum-rate constraint with equal per-antenna rates.
///
/// The event is: some nonempty subset `S` of transmit antennas satisfies
/// `log2 det(I + (rho/m) H_S H_S^H) < (|S|/m) * R` where `H_S` keeps the
/// columns in `S`.  All `2^m - 1` subsets are enumerated (`m <= 8`), with
/// the column Gram matrix computed once per realization.
pub fn vblast_outage(h: &ComplexMatrix, spec: &ChannelSpec, rho: f64, rate: f64) -> Result<bool> {
    spec.check_dims(h)?;
    check_rate(rate)?;
    if spec.m != spec.n {
        return Err(Error::InvalidScheme("V-BLAST requires m == n"));
    }
    if spec.m > VBLAST_MAX_TX {
        return Err(Error::InvalidScheme("V-BLAST subset enumeration capped at m <= 8"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidSnr(rho));
    }

    let m = spec.m as usize;
    let x = rho / spec.m as f64;
    let mut gram = [Complex64 { re: 0.0, im: 0.0 }; MAX_DIM * MAX_DIM];
    column_gram(h, &mut gram);

    // det(I_n + x H_S H_S^H) = det(I_|S| + x G[S,S]) with G = H^H H.
    for mask in 1u32..(1 << m) {
        let size = mask.count_ones() as usize;
        let info = if size == 1 {
            let j = mask.trailing_zeros() as usize;
            math::log2(1.0 + x * gram[j * m + j].re)
        } else {
            let mut sub = [Complex64 { re: 0.0, im: 0.0 }; MAX_DIM * MAX_DIM];
            let mut members = [0usize; MAX_DIM];
            let mut count = 0;
            for j in 0..m {
                if mask & (1 << j) != 0 {
                    members[count] = j;
                    count += 1;
                }
            }
            for a in 0..count {
                for b in 0..count {
                    sub[a * count + b] = gram[members[a] * m + members[b]];
                }
            }
            let mut eigs = [0.0f64; MAX_DIM];
            hermitian_eigenvalues(&mut sub, count, &mut eigs);
            eigs[..count].iter().map(|&mu| math::log2(1.0 + x * mu)).sum()
        };
        if info < (size as f64 / m as f64) * rate {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Outage of an orthogonal space-time block code: the scheme turns the
/// MIMO channel into a scalar channel with gain `|H|_F^2`, used `k/l` of
/// the time.
pub fn orthogonal_outage(
    h: &ComplexMatrix,
    spec: &ChannelSpec,
    l: u32,
    k: u32,
    rho: f64,
    rate: f64,
) -> Result<bool> {
    spec.check_dims(h)?;
    check_rate(rate)?;
    Scheme::Orthogonal { l, k }.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidSnr(rho));
    }
    let gain = h.frobenius_sq();
    let info = (k as f64 / l as f64) * math::log2(1.0 + (rho / spec.m as f64) * gain);
    Ok(info < rate)
}

/// One ARQ message over a long-term static channel: the same realization
/// is seen by every round, and the receiver decodes once the accumulated
/// mutual information `p * I` reaches the first-round rate `r1`.
pub fn arq_outcome(
    h: &ComplexMatrix,
    spec: &ChannelSpec,
    max_rounds: u32,
    rho: f64,
    r1: f64,
) -> Result<ArqOutcome> {
    spec.check_dims(h)?;
    Scheme::ArqLongTermStatic { max_rounds }.validate()?;
    if !(r1 > 0.0 && r1.is_finite()) {
        return Err(Error::InvalidRate(r1));
    }
    let info = mutual_info_bits(h, rho, spec.m as f64)?;
    if info <= 0.0 {
        return Ok(ArqOutcome {
            rounds_used: max_rounds,
            delivered: false,
        });
    }
    // Smallest round count with p * info >= r1; floats decide boundary ties.
    let needed = math::ceil(r1 / info);
    if needed <= max_rounds as f64 {
        Ok(ArqOutcome {
            rounds_used: (needed as u32).max(1),
            delivered: true,
        })
    } else {
        Ok(ArqOutcome {
            rounds_used: max_rounds,
            delivered: false,
        })
    }
}

/// Mutual information helper re-exported where schemes need it directly.
pub fn channel_info_bits(h: &ComplexMatrix, spec: &ChannelSpec, rho: f64) -> Result<f64> {
    spec.check_dims(h)?;
    eigen::mutual_info_bits(h, rho, spec.m as f64)
}

/// Scratch-free evaluation used by hot loops: outage for the non-ARQ
/// schemes, dispatching on `scheme`.
///
/// Preconditions are assumed already validated once by the caller: run
/// [`Scheme::validate`] and check `h` against `spec` (plus positive
/// `rho` and `rate`) before entering a sampling loop, then call this per
/// sample without re-paying validation.
///
/// # Panics
/// For [`Scheme::ArqLongTermStatic`]: delivery there is a multi-round
/// outcome, not a single outage event; use [`arq_outcome`] instead.
pub fn outage_unchecked(
    scheme: &Scheme,
    spec: &ChannelSpec,
    h: &ComplexMatrix,
    rho: f64,
    rate: f64,
) -> bool {
    match *scheme {
        Scheme::MimoOptimal => {
            let mut buf = [0.0f64; MAX_DIM];
            let len = gram_spectrum(h, &mut buf);
            let x = rho / spec.m as f64;
            let info: f64 = buf[..len].iter().map(|&mu| math::log2(1.0 + x * mu)).sum();
            info < rate
        }
        Scheme::VblastMl => vblast_outage(h, spec, rho, rate).expect("validated by caller"),
        Scheme::Orthogonal { l, k } => {
            let gain = h.frobenius_sq();
            let info =
                (k as f64 / l as f64) * math::log2(1.0 + (rho / spec.m as f64) * gain);
            info < rate
        }
        Scheme::ArqLongTermStatic { .. } => {
            unreachable!("ARQ estimation uses arq_outcome, not a plain outage event")
        }
    }
}
