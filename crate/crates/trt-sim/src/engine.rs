//! Monte-Carlo estimation of outage probabilities and ARQ statistics.
//!
//! # Determinism
//!
//! Every estimate is a pure function of `(seed, policy, operating point)`.
//! Sample `i` always draws from the counter-based stream `(seed, i)`, so
//! the value of each sample never depends on scheduling.  Adaptive
//! stopping works on fixed blocks of [`BLOCK_SIZE`] samples: estimation
//! conceptually walks blocks in order and stops at the end of the first
//! block where the cumulative hit count reaches the policy target.
//! Worker threads claim blocks eagerly, but blocks after the stopping
//! block are discarded rather than merged, so the reported counts are
//! bit-identical for any thread count, including one.
//!
//! The thread count comes from the `TRT_THREADS` environment variable
//! when set (clamped to 1..=64), otherwise from the machine's available
//! parallelism.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use trt_core::matrix::ComplexMatrix;
use trt_core::rng::{fill_channel, RngStream};
use trt_core::scheme::{
    arq_outcome, mimo_outage, orthogonal_outage, outage_unchecked, vblast_outage, ChannelSpec,
    Scheme,
};
use trt_core::stats::{rule_of_three, wilson_interval};
use trt_core::{db_to_linear, Error, Result};

/// Number of samples per adaptive-stopping block.
pub const BLOCK_SIZE: u64 = 4096;

/// Hard ceiling on `max_samples` per estimate.
pub const MAX_SAMPLES_LIMIT: u64 = 10_000_000_000;

/// Sampling budget and stopping rule for one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPolicy {
    /// Upper bound on channel draws (at least 1000).
    pub max_samples: u64,
    /// Stop early once this many hits have accumulated at a block
    /// boundary.
    pub target_hits: u64,
    /// Confidence level of the reported interval, in (0.5, 1).
    pub ci_confidence: f64,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        SamplingPolicy {
            max_samples: 1_000_000,
            target_hits: 200,
            ci_confidence: 0.95,
        }
    }
}

impl SamplingPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_samples < 1000 || self.max_samples > MAX_SAMPLES_LIMIT {
            return Err(Error::InvalidArgument(
                "max_samples must lie in [1000, 1e10]",
            ));
        }
        if self.target_hits == 0 {
            return Err(Error::InvalidArgument("target_hits must be positive"));
        }
        if !(self.ci_confidence > 0.5 && self.ci_confidence < 1.0) {
            return Err(Error::InvalidArgument(
                "ci_confidence must lie in (0.5, 1)",
            ));
        }
        Ok(())
    }
}

/// Estimated event probability with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Estimated ARQ delivery statistics.
///
/// `p_err` is the probability that a frame is still undelivered after the
/// final round; `throughput` is the renewal-reward rate
/// `r1 * (1 - p_err) / mean_rounds` in bpcu.  The confidence interval
/// covers `p_err`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArqEstimate {
    pub p_err: f64,
    pub mean_rounds: f64,
    pub throughput: f64,
    pub failures: u64,
    pub samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Worker-thread count: `TRT_THREADS` when set, else the machine's
/// parallelism.
pub fn worker_threads() -> usize {
    if let Ok(value) = std::env::var("TRT_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            return n.clamp(1, 64);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .clamp(1, 64)
}

/// Ordered-frontier merge state shared by the workers.
struct Frontier {
    /// Per-block results in claim order; `None` until computed.
    results: Vec<Option<(u64, u64)>>,
    /// First block index not yet merged into the cumulative counts.
    next_unmerged: usize,
    cum_hits: u64,
    cum_extra: u64,
    cum_samples: u64,
    /// Block at whose end the hit target was first reached, if any.
    stop_block: Option<u64>,
}

fn block_bounds(block: u64, max_samples: u64) -> (u64, u64) {
    let start = block * BLOCK_SIZE;
    (start, (start + BLOCK_SIZE).min(max_samples))
}

/// Walk blocks in order (possibly with parallel workers), merging counts
/// at block granularity and stopping at the first block boundary where
/// cumulative hits reach `target_hits`.  Returns
/// `(hits, extra, samples)` over exactly the merged prefix of blocks.
fn adaptive_blocks<F>(policy: &SamplingPolicy, threads: usize, block_fn: F) -> (u64, u64, u64)
where
    F: Fn(u64, u64) -> (u64, u64) + Sync,
{
    let max = policy.max_samples;
    let n_blocks = max.div_ceil(BLOCK_SIZE);
    let threads = threads.clamp(1, 64).min(n_blocks as usize).max(1);

    if threads == 1 {
        let mut hits = 0;
        let mut extra = 0;
        let mut samples = 0;
        for block in 0..n_blocks {
            let (start, end) = block_bounds(block, max);
            let (h, e) = block_fn(start, end);
            hits += h;
            extra += e;
            samples += end - start;
            if hits >= policy.target_hits {
                break;
            }
        }
        return (hits, extra, samples);
    }

    let claimer = AtomicU64::new(0);
    let frontier = Mutex::new(Frontier {
        results: vec![None; n_blocks as usize],
        next_unmerged: 0,
        cum_hits: 0,
        cum_extra: 0,
        cum_samples: 0,
        stop_block: None,
    });

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let block = claimer.fetch_add(1, Ordering::Relaxed);
                if block >= n_blocks {
                    break;
                }
                // Skip work that the stopping rule already discarded.
                {
                    let state = frontier.lock().expect("frontier lock");
                    if matches!(state.stop_block, Some(stop) if block > stop) {
                        break;
                    }
                }
                let (start, end) = block_bounds(block, max);
                let counts = block_fn(start, end);
                let mut state = frontier.lock().expect("frontier lock");
                state.results[block as usize] = Some(counts);
                // Merge the contiguous prefix; the first block boundary
                // that crosses the target freezes the stopping point.
                while state.stop_block.is_none() {
                    let next = state.next_unmerged;
                    let Some(Some((h, e))) = state.results.get(next).copied() else {
                        break;
                    };
                    let (s, en) = block_bounds(next as u64, max);
                    state.cum_hits += h;
                    state.cum_extra += e;
                    state.cum_samples += en - s;
                    state.next_unmerged = next + 1;
                    if state.cum_hits >= policy.target_hits {
                        state.stop_block = Some(next as u64);
                    }
                }
            });
        }
    });

    let mut state = frontier.into_inner().expect("frontier lock");
    if state.stop_block.is_none() {
        // Target never reached: merge everything that remains.
        while state.next_unmerged < n_blocks as usize {
            let next = state.next_unmerged;
            let (h, e) = state.results[next].expect("all blocks computed when no stop");
            let (s, en) = block_bounds(next as u64, max);
            state.cum_hits += h;
            state.cum_extra += e;
            state.cum_samples += en - s;
            state.next_unmerged = next + 1;
        }
    }
    (state.cum_hits, state.cum_extra, state.cum_samples)
}

fn finalize(hits: u64, samples: u64, policy: &SamplingPolicy) -> Result<OutageEstimate> {
    let p_hat = hits as f64 / samples as f64;
    let (ci_low, ci_high) = if hits > 0 {
        wilson_interval(hits, samples, policy.ci_confidence)?
    } else {
        (0.0, rule_of_three(samples))
    };
    Ok(OutageEstimate {
        p_hat,
        ci_low,
        ci_high,
        hits,
        samples,
    })
}

/// Estimate the probability of an arbitrary per-sample event.
///
/// `event(i)` must be a pure function of the sample index `i`; the
/// adaptive stopping rule then keeps the estimate independent of thread
/// count.  This is the entry point for calibration experiments that need
/// the real stopping logic on synthetic events.
pub fn estimate_event<F>(policy: &SamplingPolicy, event: F) -> Result<OutageEstimate>
where
    F: Fn(u64) -> bool + Sync,
{
    estimate_event_with_threads(policy, worker_threads(), event)
}

/// [`estimate_event`] with an explicit worker-thread count, bypassing the
/// `TRT_THREADS` environment lookup.  Results must be identical for every
/// `threads` value; tests rely on this to check the stopping rule.
pub fn estimate_event_with_threads<F>(
    policy: &SamplingPolicy,
    threads: usize,
    event: F,
) -> Result<OutageEstimate>
where
    F: Fn(u64) -> bool + Sync,
{
    policy.validate()?;
    let (hits, _, samples) = adaptive_blocks(policy, threads, |start, end| {
        let mut hits = 0;
        for i in start..end {
            if event(i) {
                hits += 1;
            }
        }
        (hits, 0)
    });
    finalize(hits, samples, policy)
}

fn validated_operating_point(
    scheme: &Scheme,
    m: u32,
    n: u32,
    rate: f64,
    snr_db: f64,
) -> Result<(ChannelSpec, f64)> {
    scheme.validate()?;
    let spec = ChannelSpec::new(m, n)?;
    if matches!(scheme, Scheme::VblastMl) && m != n {
        return Err(Error::InvalidScheme("V-BLAST requires m == n"));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidRate(rate));
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidSnr(snr_db));
    }
    Ok((spec, db_to_linear(snr_db)))
}

/// Estimate the outage probability of a non-ARQ scheme at one operating
/// point.  Sample `i` uses stream `(seed, i)`.
pub fn estimate_outage(
    scheme: &Scheme,
    m: u32,
    n: u32,
    rate: f64,
    snr_db: f64,
    policy: &SamplingPolicy,
    seed: u64,
) -> Result<OutageEstimate> {
    estimate_outage_with_threads(scheme, m, n, rate, snr_db, policy, seed, worker_threads())
}

/// [`estimate_outage`] with an explicit worker-thread count.
#[allow(clippy::too_many_arguments)]
pub fn estimate_outage_with_threads(
    scheme: &Scheme,
    m: u32,
    n: u32,
    rate: f64,
    snr_db: f64,
    policy: &SamplingPolicy,
    seed: u64,
    threads: usize,
) -> Result<OutageEstimate> {
    policy.validate()?;
    if matches!(scheme, Scheme::ArqLongTermStatic { .. }) {
        return Err(Error::InvalidScheme(
            "ARQ delivery statistics use estimate_arq",
        ));
    }
    let (spec, rho) = validated_operating_point(scheme, m, n, rate, snr_db)?;
    // Evaluate the checked path once so contract violations surface as
    // errors here instead of panics inside the hot loop.
    {
        let mut probe = ComplexMatrix::zeros(n as usize, m as usize)?;
        let mut stream = RngStream::new(seed, 0);
        fill_channel(&mut probe, &mut stream);
        match *scheme {
            Scheme::MimoOptimal => mimo_outage(&probe, &spec, rho, rate)?,
            Scheme::VblastMl => vblast_outage(&probe, &spec, rho, rate)?,
            Scheme::Orthogonal { l, k } => orthogonal_outage(&probe, &spec, l, k, rho, rate)?,
            Scheme::ArqLongTermStatic { .. } => unreachable!("rejected above"),
        };
    }
    let (hits, _, samples) = adaptive_blocks(policy, threads, |start, end| {
        let mut h = ComplexMatrix::zeros(n as usize, m as usize).expect("validated dims");
        let mut hits = 0;
        for i in start..end {
            let mut stream = RngStream::new(seed, i);
            fill_channel(&mut h, &mut stream);
            if outage_unchecked(scheme, &spec, &h, rho, rate) {
                hits += 1;
            }
        }
        (hits, 0)
    });
    finalize(hits, samples, policy)
}

/// Estimate ARQ delivery statistics at one operating point.
///
/// The stopping rule counts delivery failures (the rare event at high
/// SNR), so `target_hits` bounds the relative uncertainty of `p_err`.
pub fn estimate_arq(
    m: u32,
    n: u32,
    max_rounds: u32,
    first_round_rate: f64,
    snr_db: f64,
    policy: &SamplingPolicy,
    seed: u64,
) -> Result<ArqEstimate> {
    estimate_arq_with_threads(
        m,
        n,
        max_rounds,
        first_round_rate,
        snr_db,
        policy,
        seed,
        worker_threads(),
    )
}

/// [`estimate_arq`] with an explicit worker-thread count.
#[allow(clippy::too_many_arguments)]
pub fn estimate_arq_with_threads(
    m: u32,
    n: u32,
    max_rounds: u32,
    first_round_rate: f64,
    snr_db: f64,
    policy: &SamplingPolicy,
    seed: u64,
    threads: usize,
) -> Result<ArqEstimate> {
    policy.validate()?;
    let scheme = Scheme::ArqLongTermStatic { max_rounds };
    let (spec, rho) = validated_operating_point(&scheme, m, n, first_round_rate, snr_db)?;
    let (failures, round_sum, samples) = adaptive_blocks(policy, threads, |start, end| {
        let mut h = ComplexMatrix::zeros(n as usize, m as usize).expect("validated dims");
        let mut fails = 0;
        let mut rounds = 0u64;
        for i in start..end {
            let mut stream = RngStream::new(seed, i);
            fill_channel(&mut h, &mut stream);
            let outcome = arq_outcome(&h, &spec, max_rounds, rho, first_round_rate)
                .expect("operating point validated");
            rounds += outcome.rounds_used as u64;
            if !outcome.delivered {
                fails += 1;
            }
        }
        (fails, rounds)
    });
    let p_err = failures as f64 / samples as f64;
    let mean_rounds = round_sum as f64 / samples as f64;
    let (ci_low, ci_high) = if failures > 0 {
        wilson_interval(failures, samples, policy.ci_confidence)?
    } else {
        (0.0, rule_of_three(samples))
    };
    Ok(ArqEstimate {
        p_err,
        mean_rounds,
        throughput: first_round_rate * (1.0 - p_err) / mean_rounds,
        failures,
        samples,
        ci_low,
        ci_high,
    })
}

/// Run a full sweep in rate-major order: every SNR of the first rate,
/// then the next rate, and so on.
///
/// Each (rate, SNR) point derives its own seed from the master seed and
/// the pair of grid indices, so any subset of points can be reproduced
/// independently of the rest of the sweep.
pub fn sweep(
    config: &crate::config::SweepConfig,
) -> core::result::Result<Vec<crate::table::ResultRow>, crate::SimError> {
    use trt_core::predict::{classify_scheme_region, RegionKind};
    use trt_core::rng::derive_seed;

    config.validate()?;
    let scheme = config.scheme()?;
    let grid = config.snr_grid()?;
    let policy = config.policy();
    let mut rows = Vec::with_capacity(config.rates.len() * grid.len());
    for (rate_idx, &rate) in config.rates.iter().enumerate() {
        for (snr_idx, &snr_db) in grid.iter().enumerate() {
            let point_seed =
                derive_seed(config.seed, ((rate_idx as u64) << 32) | snr_idx as u64);
            let rho = db_to_linear(snr_db);
            // Below 0 dB every positive rate exceeds min(m, n) * log2(rho),
            // which is the degenerate condition in the limit.
            let region = if rho > 1.0 {
                classify_scheme_region(&scheme, config.m, config.n, rate, rho, config.delta)?
                    .kind
                    .to_string()
            } else {
                RegionKind::Degenerate.to_string()
            };
            let row = match scheme {
                Scheme::ArqLongTermStatic { max_rounds } => {
                    let est = estimate_arq(
                        config.m, config.n, max_rounds, rate, snr_db, &policy, point_seed,
                    )?;
                    crate::table::ResultRow::from_arq(
                        max_rounds, config.m, config.n, rate, snr_db, &est, region,
                    )
                }
                _ => {
                    let est = estimate_outage(
                        &scheme, config.m, config.n, rate, snr_db, &policy, point_seed,
                    )?;
                    crate::table::ResultRow::from_outage(
                        &scheme, config.m, config.n, rate, snr_db, &est, region,
                    )
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}
