//! Sweep configuration: a serializable description of a full simulation
//! run (scheme, antenna geometry, rate list, SNR grid, sampling policy).
//!
//! JSON keys are kebab-case, every field has a default, and unknown keys
//! are rejected so typos fail loudly:
//!
//! ```json
//! {
//!   "scheme": "mimo",
//!   "m": 2, "n": 2,
//!   "rates": [4.0, 8.0],
//!   "snr-start-db": 10.0, "snr-stop-db": 32.0, "snr-step-db": 2.0,
//!   "max-samples": 8000000, "target-hits": 200,
//!   "seed": 7
//! }
//! ```

use serde::{Deserialize, Serialize};
use trt_core::scheme::Scheme;

use crate::engine::SamplingPolicy;
use crate::table::parse_scheme_tag;
use crate::SimError;

/// Largest number of SNR grid points a single sweep may request.
pub const MAX_GRID_POINTS: usize = 4096;

fn default_scheme() -> String {
    "mimo".to_string()
}
fn default_antennas() -> u32 {
    2
}
fn default_rates() -> Vec<f64> {
    vec![4.0, 8.0]
}
fn default_snr_start() -> f64 {
    10.0
}
fn default_snr_stop() -> f64 {
    30.0
}
fn default_snr_step() -> f64 {
    2.0
}
fn default_max_samples() -> u64 {
    1_000_000
}
fn default_target_hits() -> u64 {
    200
}
fn default_ci_confidence() -> f64 {
    0.95
}
fn default_seed() -> u64 {
    1
}
fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_antennas")]
    pub m: u32,
    #[serde(default = "default_antennas")]
    pub n: u32,
    /// Target rates in bpcu; for ARQ these are first-round rates.
    #[serde(default = "default_rates")]
    pub rates: Vec<f64>,
    #[serde(default = "default_snr_start")]
    pub snr_start_db: f64,
    #[serde(default = "default_snr_stop")]
    pub snr_stop_db: f64,
    #[serde(default = "default_snr_step")]
    pub snr_step_db: f64,
    #[serde(default = "default_max_samples")]
    pub max_samples: u64,
    #[serde(default = "default_target_hits")]
    pub target_hits: u64,
    #[serde(default = "default_ci_confidence")]
    pub ci_confidence: f64,
    /// Master seed; each (rate, SNR) point derives its own stream family.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Smallness threshold for region classification.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes")
    }

    /// Parse and validate the scheme tag against the antenna geometry.
    pub fn scheme(&self) -> Result<Scheme, SimError> {
        let scheme = parse_scheme_tag(&self.scheme).map_err(SimError::Config)?;
        if matches!(scheme, Scheme::VblastMl) && self.m != self.n {
            return Err(SimError::Config(
                "vblast requires m == n".to_string(),
            ));
        }
        Ok(scheme)
    }

    pub fn policy(&self) -> SamplingPolicy {
        SamplingPolicy {
            max_samples: self.max_samples,
            target_hits: self.target_hits,
            ci_confidence: self.ci_confidence,
        }
    }

    /// Expand the inclusive SNR grid.  The stop value is included when it
    /// lands within a small tolerance of a step multiple.
    pub fn snr_grid(&self) -> Result<Vec<f64>, SimError> {
        expand_snr_grid(self.snr_start_db, self.snr_stop_db, self.snr_step_db)
    }

    /// Full validation: scheme, rates, grid, and sampling policy.
    pub fn validate(&self) -> Result<(), SimError> {
        self.scheme()?;
        if self.rates.is_empty() {
            return Err(SimError::Config("rates must not be empty".into()));
        }
        if self.rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(SimError::Config(
                "rates must be positive and finite".into(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(SimError::Config("delta must lie in (0, 1)".into()));
        }
        self.snr_grid()?;
        self.policy().validate()?;
        Ok(())
    }
}

/// Inclusive arithmetic grid `start, start + step, ...` up to `stop`
/// (within a small tolerance of the endpoint).
pub fn expand_snr_grid(start_db: f64, stop_db: f64, step_db: f64) -> Result<Vec<f64>, SimError> {
    if !(step_db > 0.0 && step_db.is_finite()) {
        return Err(SimError::Config("snr-step-db must be positive".into()));
    }
    if !start_db.is_finite() || !stop_db.is_finite() || stop_db < start_db {
        return Err(SimError::Config(
            "need snr-start-db <= snr-stop-db, both finite".into(),
        ));
    }
    let count = ((stop_db - start_db) / step_db + 1e-9).floor() as usize + 1;
    if count > MAX_GRID_POINTS {
        return Err(SimError::Config(format!(
            "SNR grid has {count} points; the limit is {MAX_GRID_POINTS}"
        )));
    }
    Ok((0..count).map(|i| start_db + i as f64 * step_db).collect())
}
