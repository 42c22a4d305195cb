//! Behavioral tests for the sampling engine: stopping-rule determinism
//! across thread counts, interval calibration against synthetic events
//! with known probabilities, and an independent replay oracle for the
//! ARQ accounting.

use trt_sim::config::SweepConfig;
use trt_sim::engine::{
    estimate_arq, estimate_arq_with_threads, estimate_event, estimate_event_with_threads,
    estimate_outage, estimate_outage_with_threads, sweep, OutageEstimate, SamplingPolicy,
    BLOCK_SIZE,
};
use trt_sim::table::{from_csv, to_csv};

use trt_core::curve::{siso_exact, CurvePoint};
use trt_core::db_to_linear;
use trt_core::rng::{sample_channel, RngStream};
use trt_core::scheme::{channel_info_bits, ChannelSpec, Scheme};

/// SplitMix64 finalizer: an independent uniform hash used to build
/// synthetic Bernoulli events whose true probability is known exactly.
fn hash64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Bernoulli(p) event driven by `hash64`, keyed so distinct experiments
/// see decorrelated streams.
fn bernoulli_event(key: u64, p: f64) -> impl Fn(u64) -> bool + Sync {
    let threshold = (p * (u64::MAX as f64)) as u64;
    move |i| hash64(key.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(i)) < threshold
}

fn policy(max_samples: u64, target_hits: u64) -> SamplingPolicy {
    SamplingPolicy {
        max_samples,
        target_hits,
        ci_confidence: 0.95,
    }
}

fn assert_estimates_identical(a: &OutageEstimate, b: &OutageEstimate) {
    assert_eq!(a.hits, b.hits);
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
    assert_eq!(a.ci_low.to_bits(), b.ci_low.to_bits());
    assert_eq!(a.ci_high.to_bits(), b.ci_high.to_bits());
}

#[test]
fn stopping_rule_is_thread_invariant_on_synthetic_events() {
    let pol = policy(300_000, 150);
    let baseline = estimate_event_with_threads(&pol, 1, bernoulli_event(7, 0.003)).unwrap();
    assert!(baseline.hits >= 150, "stream should reach the target");
    for threads in [2, 3, 4, 8, 64] {
        let alt = estimate_event_with_threads(&pol, threads, bernoulli_event(7, 0.003)).unwrap();
        assert_estimates_identical(&baseline, &alt);
    }
    // The env-dispatching entry point must agree with the explicit one.
    let auto = estimate_event(&pol, bernoulli_event(7, 0.003)).unwrap();
    assert_estimates_identical(&baseline, &auto);
}

#[test]
fn outage_estimates_are_thread_invariant() {
    let pol = policy(120_000, 100);
    let scheme = Scheme::MimoOptimal;
    let one = estimate_outage_with_threads(&scheme, 2, 2, 4.0, 14.0, &pol, 42, 1).unwrap();
    for threads in [2, 4, 8] {
        let alt =
            estimate_outage_with_threads(&scheme, 2, 2, 4.0, 14.0, &pol, 42, threads).unwrap();
        assert_estimates_identical(&one, &alt);
    }
    let auto = estimate_outage(&scheme, 2, 2, 4.0, 14.0, &pol, 42).unwrap();
    assert_estimates_identical(&one, &auto);
}

#[test]
fn arq_estimates_are_thread_invariant() {
    let pol = policy(60_000, 50);
    let one = estimate_arq_with_threads(2, 2, 2, 4.0, 10.0, &pol, 5, 1).unwrap();
    for threads in [2, 4, 8] {
        let alt = estimate_arq_with_threads(2, 2, 2, 4.0, 10.0, &pol, 5, threads).unwrap();
        assert_eq!(one.failures, alt.failures);
        assert_eq!(one.samples, alt.samples);
        assert_eq!(one.mean_rounds.to_bits(), alt.mean_rounds.to_bits());
        assert_eq!(one.throughput.to_bits(), alt.throughput.to_bits());
    }
}

#[test]
fn wilson_intervals_cover_the_truth_at_roughly_nominal_rate() {
    // 400 independent synthetic experiments at a known p; the 95% interval
    // should cover the truth in at least 93% of them.  The events are
    // deterministic hashes, so this is a frozen calibration check, not a
    // flaky statistical one.
    let p_true = 0.05;
    let pol = policy(20_000, u64::MAX >> 1);
    let mut covered = 0;
    for exp in 0..400u64 {
        let est = estimate_event(&pol, bernoulli_event(1000 + exp, p_true)).unwrap();
        assert_eq!(est.samples, 20_000, "target is unreachable, so run to max");
        if est.ci_low <= p_true && p_true <= est.ci_high {
            covered += 1;
        }
    }
    let coverage = covered as f64 / 400.0;
    assert!(
        coverage >= 0.93,
        "coverage {coverage} fell below 0.93 (nominal 0.95)"
    );
}

#[test]
fn adaptive_stopping_does_expected_work() {
    // p = 0.01, target 200 hits: the stopping rule should end near
    // 200 / 0.01 = 20k samples, rounded up to a block boundary.
    let pol = policy(10_000_000, 200);
    let est = estimate_event(&pol, bernoulli_event(99, 0.01)).unwrap();
    assert!(est.hits >= 200);
    assert_eq!(est.samples % BLOCK_SIZE, 0, "stops on a block boundary");
    assert!(
        (16_384..=32_768).contains(&est.samples),
        "samples {} far from the expected ~20k",
        est.samples
    );

    // A common event must stop after the very first block.
    let est = estimate_event(&pol, bernoulli_event(3, 0.5)).unwrap();
    assert_eq!(est.samples, BLOCK_SIZE);
}

#[test]
fn rare_event_reports_rule_of_three_and_flags() {
    // 2x2 at 30 dB and 4 bpcu has outage around 4e-9: a 1e5-sample run
    // sees zero hits and must fall back to the upper bound 3/n.
    let pol = policy(100_000, 10);
    let est = estimate_outage(&Scheme::MimoOptimal, 2, 2, 4.0, 30.0, &pol, 7).unwrap();
    assert_eq!(est.hits, 0);
    assert_eq!(est.samples, 100_000);
    assert_eq!(est.p_hat, 0.0);
    assert_eq!(est.ci_low, 0.0);
    assert_eq!(est.ci_high, 3.0 / 100_000.0);
    let point = CurvePoint {
        snr_db: 30.0,
        p_hat: est.p_hat,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        hits: est.hits,
        samples: est.samples,
    };
    assert!(point.is_flagged());
}

#[test]
fn siso_monte_carlo_matches_the_closed_form() {
    let exact = siso_exact(2.0, 10.0);
    let pol = policy(400_000, 30_000);
    let est = estimate_outage(&Scheme::MimoOptimal, 1, 1, 2.0, 10.0, &pol, 2024).unwrap();
    let half_width = (est.ci_high - est.ci_low) / 2.0;
    assert!(
        (est.p_hat - exact).abs() <= 3.0 * half_width,
        "MC {} vs exact {} beyond 3 half-widths ({})",
        est.p_hat,
        exact,
        half_width
    );
}

#[test]
fn single_round_arq_is_exactly_plain_outage() {
    // With max_rounds = 1 a delivery failure is the same event as an
    // outage at the first-round rate, and both estimators consume the
    // identical per-sample random streams.
    let pol = policy(50_000, 500);
    let arq = estimate_arq(2, 2, 1, 4.0, 12.0, &pol, 9).unwrap();
    let out = estimate_outage(&Scheme::MimoOptimal, 2, 2, 4.0, 12.0, &pol, 9).unwrap();
    assert_eq!(arq.failures, out.hits);
    assert_eq!(arq.samples, out.samples);
    assert_eq!(arq.p_err.to_bits(), out.p_hat.to_bits());
}

#[test]
fn arq_accounting_matches_an_independent_replay() {
    // Replay every sample by hand from the same seeded streams and
    // recompute delivery and round counts straight from the mutual
    // information, then demand exact agreement with the engine.
    let (m, n, max_rounds, r1, snr_db, seed) = (2u32, 2u32, 2u32, 4.0, 8.0, 123u64);
    let total = 2 * BLOCK_SIZE;
    let pol = policy(total, u64::MAX >> 1);
    let est = estimate_arq(m, n, max_rounds, r1, snr_db, &pol, seed).unwrap();
    assert_eq!(est.samples, total);

    let spec = ChannelSpec::new(m, n).unwrap();
    let rho = db_to_linear(snr_db);
    let mut failures = 0u64;
    let mut round_sum = 0u64;
    for i in 0..total {
        let h = sample_channel(RngStream::new(seed, i), n as usize, m as usize).unwrap();
        let info = channel_info_bits(&h, &spec, rho).unwrap();
        let needed = (r1 / info).ceil();
        if needed <= max_rounds as f64 {
            round_sum += (needed as u64).max(1);
        } else {
            failures += 1;
            round_sum += max_rounds as u64;
        }
    }
    assert_eq!(est.failures, failures);
    assert_eq!(
        est.mean_rounds.to_bits(),
        (round_sum as f64 / total as f64).to_bits()
    );
    assert_eq!(
        est.p_err.to_bits(),
        (failures as f64 / total as f64).to_bits()
    );
    assert!(failures > 0, "operating point should see some failures");
}

#[test]
fn arq_delivery_statistics_stay_in_bounds() {
    let pol = policy(30_000, 300);
    for snr_db in [0.0, 6.0, 12.0] {
        let est = estimate_arq(2, 2, 2, 4.0, snr_db, &pol, 31).unwrap();
        assert!((0.0..=1.0).contains(&est.p_err));
        assert!((1.0..=2.0).contains(&est.mean_rounds));
        assert!(est.throughput >= 0.0);
        assert!(
            est.throughput <= 4.0 * (1.0 - est.p_err) + 1e-12,
            "throughput cannot exceed the delivered fraction of r1"
        );
    }
}

#[test]
fn sweep_output_round_trips_through_csv() {
    let config: SweepConfig = serde_json::from_str(
        r#"{
            "scheme": "mimo", "m": 1, "n": 1,
            "rates": [1.0, 2.0],
            "snr-start-db": 6.0, "snr-stop-db": 10.0, "snr-step-db": 2.0,
            "max-samples": 20000, "target-hits": 1000,
            "seed": 11
        }"#,
    )
    .unwrap();
    let rows = sweep(&config).unwrap();
    assert_eq!(rows.len(), 6);
    let text = to_csv(&rows).unwrap();
    let parsed = from_csv(&text).unwrap();
    let text_again = to_csv(&parsed).unwrap();
    assert_eq!(text, text_again, "CSV must round-trip byte for byte");
}
