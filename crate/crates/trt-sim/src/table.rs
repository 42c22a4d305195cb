//! Result tables: one row per (scheme, rate, SNR) operating point, with
//! a CSV form whose bytes are a pure function of the rows.
//!
//! Floats are rendered with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly, so re-serializing parsed output is
//! byte-identical and repeated runs of the same sweep diff clean.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use trt_core::curve::CurvePoint;
use trt_core::scheme::Scheme;

use crate::engine::{ArqEstimate, OutageEstimate};

/// Columns present only for ARQ sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArqColumns {
    /// Long-term delivered throughput in bpcu.
    pub eta: f64,
    /// Probability of delivery failure after the last round.
    pub p_err: f64,
    pub mean_rounds: f64,
}

/// One measured operating point.
///
/// For ARQ rows `p_outage` carries `p_err` (the rare event the curve
/// tracks) and the extra columns hold the delivery statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    pub m: u32,
    pub n: u32,
    pub rate_bpcu: f64,
    pub snr_db: f64,
    pub p_outage: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub samples: u64,
    pub hits: u64,
    /// Operating-region label: a region index, `transitional`, or
    /// `degenerate`.
    pub region: String,
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub arq: Option<ArqColumns>,
}

const BASE_HEADER: &str = "scheme,m,n,rate_bpcu,snr_db,p_outage,ci_lo,ci_hi,samples,hits,region,flagged";
const ARQ_HEADER_SUFFIX: &str = ",eta,p_err,mean_rounds";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("table is empty")]
    Empty,
    #[error("line 1: expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("rows mix ARQ and non-ARQ schemes; write them to separate tables")]
    MixedKinds,
}

/// Canonical short tag for a scheme, as used in the CSV `scheme` column
/// and on the command line.
pub fn scheme_tag(scheme: &Scheme) -> String {
    match *scheme {
        Scheme::MimoOptimal => "mimo".to_string(),
        Scheme::VblastMl => "vblast".to_string(),
        Scheme::Orthogonal { l, k } => format!("orth:{l}:{k}"),
        Scheme::ArqLongTermStatic { max_rounds } => format!("arq:{max_rounds}"),
    }
}

/// Parse a scheme tag: `mimo`, `vblast`, `orth:L:K`, or `arq:ROUNDS`.
pub fn parse_scheme_tag(tag: &str) -> Result<Scheme, String> {
    let mut parts = tag.split(':');
    let head = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    let scheme = match (head, rest.as_slice()) {
        ("mimo", []) => Scheme::MimoOptimal,
        ("vblast", []) => Scheme::VblastMl,
        ("orth", [l, k]) => {
            let l = l.parse().map_err(|_| format!("bad block length `{l}`"))?;
            let k = k.parse().map_err(|_| format!("bad symbol count `{k}`"))?;
            Scheme::Orthogonal { l, k }
        }
        ("arq", [rounds]) => {
            let max_rounds = rounds
                .parse()
                .map_err(|_| format!("bad round count `{rounds}`"))?;
            Scheme::ArqLongTermStatic { max_rounds }
        }
        _ => {
            return Err(format!(
                "unknown scheme `{tag}` (expected mimo, vblast, orth:L:K, or arq:ROUNDS)"
            ))
        }
    };
    scheme.validate().map_err(|e| e.to_string())?;
    Ok(scheme)
}

/// Exact decimal rendering of an `f64` (17 significant digits).
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl ResultRow {
    pub fn from_outage(
        scheme: &Scheme,
        m: u32,
        n: u32,
        rate_bpcu: f64,
        snr_db: f64,
        est: &OutageEstimate,
        region: String,
    ) -> Self {
        let mut row = ResultRow {
            scheme: scheme_tag(scheme),
            m,
            n,
            rate_bpcu,
            snr_db,
            p_outage: est.p_hat,
            ci_lo: est.ci_low,
            ci_hi: est.ci_high,
            samples: est.samples,
            hits: est.hits,
            region,
            flagged: false,
            arq: None,
        };
        row.flagged = row.curve_point().is_flagged();
        row
    }

    pub fn from_arq(
        max_rounds: u32,
        m: u32,
        n: u32,
        rate_bpcu: f64,
        snr_db: f64,
        est: &ArqEstimate,
        region: String,
    ) -> Self {
        let mut row = ResultRow {
            scheme: scheme_tag(&Scheme::ArqLongTermStatic { max_rounds }),
            m,
            n,
            rate_bpcu,
            snr_db,
            p_outage: est.p_err,
            ci_lo: est.ci_low,
            ci_hi: est.ci_high,
            samples: est.samples,
            hits: est.failures,
            region,
            flagged: false,
            arq: Some(ArqColumns {
                eta: est.throughput,
                p_err: est.p_err,
                mean_rounds: est.mean_rounds,
            }),
        };
        row.flagged = row.curve_point().is_flagged();
        row
    }

    /// The row as a curve point (for slope and spacing estimation).
    pub fn curve_point(&self) -> CurvePoint {
        CurvePoint {
            snr_db: self.snr_db,
            p_hat: self.p_outage,
            ci_low: self.ci_lo,
            ci_high: self.ci_hi,
            hits: self.hits,
            samples: self.samples,
        }
    }
}

/// Serialize rows to CSV.  All rows must agree on whether they carry the
/// ARQ columns.
pub fn to_csv(rows: &[ResultRow]) -> Result<String, TableError> {
    if rows.is_empty() {
        return Err(TableError::Empty);
    }
    let with_arq = rows[0].arq.is_some();
    if rows.iter().any(|r| r.arq.is_some() != with_arq) {
        return Err(TableError::MixedKinds);
    }
    let mut out = String::with_capacity(rows.len() * 160);
    out.push_str(BASE_HEADER);
    if with_arq {
        out.push_str(ARQ_HEADER_SUFFIX);
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row.scheme);
        for field in [
            row.m.to_string(),
            row.n.to_string(),
            fmt_f64(row.rate_bpcu),
            fmt_f64(row.snr_db),
            fmt_f64(row.p_outage),
            fmt_f64(row.ci_lo),
            fmt_f64(row.ci_hi),
            row.samples.to_string(),
            row.hits.to_string(),
            row.region.clone(),
            row.flagged.to_string(),
        ] {
            out.push(',');
            out.push_str(&field);
        }
        if let Some(arq) = row.arq {
            for field in [arq.eta, arq.p_err, arq.mean_rounds] {
                out.push(',');
                out.push_str(&fmt_f64(field));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(
    value: &str,
    name: &str,
    line: usize,
) -> Result<T, TableError> {
    value.parse().map_err(|_| TableError::Line {
        line,
        message: format!("cannot parse {name} from `{value}`"),
    })
}

/// Parse a CSV table produced by [`to_csv`].  Errors carry 1-based line
/// numbers.
pub fn from_csv(text: &str) -> Result<Vec<ResultRow>, TableError> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(TableError::Empty);
    };
    let header = header.trim_end_matches('\r');
    let with_arq = if header == BASE_HEADER {
        false
    } else if header == format!("{BASE_HEADER}{ARQ_HEADER_SUFFIX}") {
        true
    } else {
        return Err(TableError::Header {
            expected: BASE_HEADER.to_string(),
            found: header.to_string(),
        });
    };
    let expected_fields = if with_arq { 15 } else { 12 };
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1; // 1-based
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != expected_fields {
            return Err(TableError::Line {
                line,
                message: format!(
                    "expected {expected_fields} fields, found {}",
                    fields.len()
                ),
            });
        }
        parse_scheme_tag(fields[0]).map_err(|message| TableError::Line { line, message })?;
        let arq = if with_arq {
            Some(ArqColumns {
                eta: parse_field(fields[12], "eta", line)?,
                p_err: parse_field(fields[13], "p_err", line)?,
                mean_rounds: parse_field(fields[14], "mean_rounds", line)?,
            })
        } else {
            None
        };
        rows.push(ResultRow {
            scheme: fields[0].to_string(),
            m: parse_field(fields[1], "m", line)?,
            n: parse_field(fields[2], "n", line)?,
            rate_bpcu: parse_field(fields[3], "rate_bpcu", line)?,
            snr_db: parse_field(fields[4], "snr_db", line)?,
            p_outage: parse_field(fields[5], "p_outage", line)?,
            ci_lo: parse_field(fields[6], "ci_lo", line)?,
            ci_hi: parse_field(fields[7], "ci_hi", line)?,
            samples: parse_field(fields[8], "samples", line)?,
            hits: parse_field(fields[9], "hits", line)?,
            region: fields[10].to_string(),
            flagged: parse_field(fields[11], "flagged", line)?,
            arq,
        });
    }
    Ok(rows)
}

/// Scan rows (grouped by scheme and rate, in file order) for places
/// where the outage estimate rises with SNR beyond what the confidence
/// intervals allow.  Returns one description per violation.
pub fn monotonicity_violations(rows: &[ResultRow]) -> Vec<String> {
    let mut report = Vec::new();
    let mut groups: Vec<(&ResultRow, Vec<&ResultRow>)> = Vec::new();
    for row in rows {
        let key = (&row.scheme, row.m, row.n, row.rate_bpcu);
        match groups
            .iter_mut()
            .find(|(head, _)| (&head.scheme, head.m, head.n, head.rate_bpcu) == key)
        {
            Some((_, members)) => members.push(row),
            None => groups.push((row, vec![row])),
        }
    }
    for (_, members) in groups {
        for pair in members.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.snr_db > a.snr_db && b.ci_lo > a.ci_hi {
                report.push(format!(
                    "{} {}x{} rate {}: outage rose from {:.3e} to {:.3e} between {} dB and {} dB",
                    a.scheme, a.m, a.n, a.rate_bpcu, a.p_outage, b.p_outage, a.snr_db, b.snr_db
                ));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ResultRow {
        ResultRow {
            scheme: "mimo".into(),
            m: 2,
            n: 2,
            rate_bpcu: 4.0,
            snr_db: 18.0,
            p_outage: 1.25e-3,
            ci_lo: 1.1e-3,
            ci_hi: 1.4e-3,
            samples: 400_000,
            hits: 500,
            region: "0".into(),
            flagged: false,
            arq: None,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut row2 = sample_row();
        row2.snr_db = 20.0;
        row2.p_outage = 0.1 + 0.2; // deliberately not representable exactly
        let rows = vec![sample_row(), row2];
        let text = to_csv(&rows).unwrap();
        let parsed = from_csv(&text).unwrap();
        assert_eq!(rows, parsed);
        let text2 = to_csv(&parsed).unwrap();
        assert_eq!(text, text2, "serialize-parse-serialize must be stable");
    }

    #[test]
    fn arq_rows_have_extra_columns() {
        let mut row = sample_row();
        row.scheme = "arq:2".into();
        row.arq = Some(ArqColumns {
            eta: 3.98,
            p_err: 1.25e-3,
            mean_rounds: 1.004,
        });
        let text = to_csv(std::slice::from_ref(&row)).unwrap();
        assert!(text.starts_with(&format!("{BASE_HEADER}{ARQ_HEADER_SUFFIX}\n")));
        let parsed = from_csv(&text).unwrap();
        assert_eq!(parsed[0], row);
        // Mixing kinds is rejected.
        assert!(matches!(
            to_csv(&[row, sample_row()]),
            Err(TableError::MixedKinds)
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let mut row = sample_row();
        row.samples = 987_654;
        let text = to_csv(&[row]).unwrap();
        let broken = text.replace("987654", "9.9e5");
        match from_csv(&broken) {
            Err(TableError::Line { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("samples"), "{message}");
            }
            other => panic!("expected line error, got {other:?}"),
        }
        let missing = "scheme,m,n\nmimo,2,2\n";
        assert!(matches!(
            from_csv(missing),
            Err(TableError::Header { .. })
        ));
        let short_row = format!("{BASE_HEADER}\nmimo,2,2\n");
        match from_csv(&short_row) {
            Err(TableError::Line { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected line error, got {other:?}"),
        }
    }

    #[test]
    fn scheme_tags_round_trip() {
        for scheme in [
            Scheme::MimoOptimal,
            Scheme::VblastMl,
            Scheme::Orthogonal { l: 4, k: 3 },
            Scheme::ArqLongTermStatic { max_rounds: 2 },
        ] {
            let tag = scheme_tag(&scheme);
            assert_eq!(parse_scheme_tag(&tag).unwrap(), scheme);
        }
        assert!(parse_scheme_tag("laser").is_err());
        assert!(parse_scheme_tag("orth:0:0").is_err());
        assert!(parse_scheme_tag("orth:2").is_err());
        assert!(parse_scheme_tag("arq:x").is_err());
    }

    #[test]
    fn monotonicity_scan_reports_significant_rises() {
        let mut a = sample_row();
        let mut b = sample_row();
        b.snr_db = 20.0;
        // Overlapping intervals: no violation.
        assert!(monotonicity_violations(&[a.clone(), b.clone()]).is_empty());
        // Clearly rising probability: flagged.
        b.p_outage = 5e-3;
        b.ci_lo = 4.5e-3;
        b.ci_hi = 5.5e-3;
        let report = monotonicity_violations(&[a.clone(), b.clone()]);
        assert_eq!(report.len(), 1);
        assert!(report[0].contains("rose"));
        // Different rates are separate groups.
        b.rate_bpcu = 8.0;
        assert!(monotonicity_violations(&[a.clone(), b]).is_empty());
        // Zero-hit tails never count as violations.
        let mut c = sample_row();
        c.snr_db = 22.0;
        c.hits = 0;
        c.p_outage = 0.0;
        c.ci_lo = 0.0;
        c.ci_hi = 7.5e-6;
        a.snr_db = 21.0;
        assert!(monotonicity_violations(&[a, c]).is_empty());
    }
}
