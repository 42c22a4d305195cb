//! End-to-end tests of the `trt` binary: exact output formats, exit
//! codes, file round-trips, and determinism under the `TRT_THREADS`
//! environment override.

use std::path::PathBuf;
use std::process::{Command, Output};

use trt_sim::table::from_csv;

const BIN: &str = env!("CARGO_BIN_EXE_trt");

fn trt(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn trt_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env("TRT_THREADS", threads)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("trt_cli_io_{}_{name}", std::process::id()))
}

struct TempFile(PathBuf);

impl TempFile {
    fn new(name: &str) -> Self {
        TempFile(temp_path(name))
    }
    fn as_str(&self) -> &str {
        self.0.to_str().expect("temp path is UTF-8")
    }
}

impl Drop for TempFile {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

#[test]
fn predict_prints_the_pinned_coefficient_block() {
    let out = trt(&["predict", "--m", "2", "--n", "2", "--k", "0", "--delta-r", "4"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "scheme = mimo\n\
         antennas = 2x2\n\
         k = 0\n\
         region = (0, 1)\n\
         c = 3\n\
         g = 4\n\
         t = 1.3333\n\
         slope-per-decade = 4\n\
         spacing-db = 9.03\n"
    );
}

#[test]
fn predict_reports_an_empty_region_without_failing() {
    let out = trt(&["predict", "--scheme", "arq:2", "--m", "2", "--n", "2", "--k", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("region = (2, 2) [empty]"), "got:\n{text}");
    assert!(text.contains("c = 0.5"));
}

#[test]
fn predict_rejects_an_out_of_range_region_index() {
    let out = trt(&["predict", "--m", "2", "--n", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let out = trt(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn regions_prints_the_phase_walk() {
    let out = trt(&["regions", "--rate", "22", "--snr-step-db", "5"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "20 dB: degenerate\n\
         35 dB: transitional\n\
         40 dB: 1\n\
         60 dB: transitional\n\
         80 dB: 0\n"
    );
}

const SMALL_SWEEP: &[&str] = &[
    "simulate",
    "--m",
    "1",
    "--n",
    "1",
    "--rates",
    "1,2",
    "--snr-start-db",
    "6",
    "--snr-stop-db",
    "10",
    "--snr-step-db",
    "2",
    "--max-samples",
    "20000",
    "--target-hits",
    "1000",
    "--seed",
    "77",
];

#[test]
fn simulate_writes_a_stable_parseable_table() {
    let file_a = TempFile::new("stable_a.csv");
    let file_b = TempFile::new("stable_b.csv");
    let mut args_a = SMALL_SWEEP.to_vec();
    args_a.extend(["--out", file_a.as_str()]);
    let mut args_b = SMALL_SWEEP.to_vec();
    args_b.extend(["--out", file_b.as_str()]);

    assert!(trt(&args_a).status.success());
    assert!(trt(&args_b).status.success());

    let bytes_a = std::fs::read(&file_a.0).unwrap();
    let bytes_b = std::fs::read(&file_b.0).unwrap();
    assert_eq!(bytes_a, bytes_b, "repeat runs must be byte-identical");

    let text = String::from_utf8(bytes_a).unwrap();
    assert!(text.starts_with(
        "scheme,m,n,rate_bpcu,snr_db,p_outage,ci_lo,ci_hi,samples,hits,region,flagged\n"
    ));
    let rows = from_csv(&text).unwrap();
    assert_eq!(rows.len(), 6, "2 rates x 3 SNR points");
    assert!(rows.iter().all(|r| r.scheme == "mimo" && r.m == 1));
}

#[test]
fn simulate_is_byte_identical_across_thread_counts() {
    let mut files = Vec::new();
    for threads in ["1", "4", "8"] {
        let file = TempFile::new(&format!("threads_{threads}.csv"));
        let mut args = SMALL_SWEEP.to_vec();
        args.extend(["--out", file.as_str()]);
        let out = trt_with_threads(&args, threads);
        assert!(out.status.success(), "threads={threads}: {}", stderr(&out));
        files.push(file);
    }
    let reference = std::fs::read(&files[0].0).unwrap();
    for file in &files[1..] {
        assert_eq!(reference, std::fs::read(&file.0).unwrap());
    }
}

#[test]
fn simulate_emits_json_rows_on_request() {
    let mut args = SMALL_SWEEP.to_vec();
    args.extend(["--format", "json"]);
    let out = trt(&args);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = rows.as_array().expect("a JSON array of rows");
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0]["scheme"], "mimo");
    assert!(rows[0]["p_outage"].as_f64().is_some());
}

#[test]
fn simulate_rejects_an_empty_rate_list_in_the_config() {
    let config = TempFile::new("empty_rates.json");
    std::fs::write(&config.0, r#"{ "rates": [] }"#).unwrap();
    let out = trt(&["simulate", "--config", config.as_str()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("rates"));
}

#[test]
fn simulate_rejects_unknown_config_keys() {
    let config = TempFile::new("unknown_key.json");
    std::fs::write(&config.0, r#"{ "rate": [4.0] }"#).unwrap();
    let out = trt(&["simulate", "--config", config.as_str()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file_fields() {
    let config = TempFile::new("override.json");
    std::fs::write(
        &config.0,
        r#"{
            "m": 1, "n": 1, "rates": [1.0],
            "snr-start-db": 10.0, "snr-stop-db": 10.0, "snr-step-db": 1.0,
            "max-samples": 5000, "target-hits": 100, "seed": 3
        }"#,
    )
    .unwrap();
    let out = trt(&[
        "simulate",
        "--config",
        config.as_str(),
        "--rates",
        "2",
    ]);
    assert!(out.status.success());
    let rows = from_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].rate_bpcu, 2.0, "the flag value wins");
}

#[test]
fn arq_tables_carry_the_delivery_columns() {
    let out = trt(&[
        "simulate",
        "--scheme",
        "arq:2",
        "--m",
        "2",
        "--n",
        "2",
        "--rates",
        "4",
        "--snr-start-db",
        "6",
        "--snr-stop-db",
        "8",
        "--snr-step-db",
        "2",
        "--max-samples",
        "5000",
        "--target-hits",
        "100",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let header = text.lines().next().unwrap();
    assert!(header.ends_with(",region,flagged,eta,p_err,mean_rounds"));
    let rows = from_csv(&text).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let arq = row.arq.as_ref().expect("ARQ rows keep their columns");
        assert!(arq.mean_rounds >= 1.0);
        assert!(arq.eta <= 4.0);
    }
}

#[test]
fn analyze_reports_slopes_and_spacing() {
    let table = TempFile::new("analyze.csv");
    let out = trt(&[
        "simulate",
        "--m",
        "1",
        "--n",
        "1",
        "--rates",
        "2,4",
        "--snr-start-db",
        "10",
        "--snr-stop-db",
        "24",
        "--snr-step-db",
        "2",
        "--max-samples",
        "20000",
        "--target-hits",
        "1000",
        "--seed",
        "5",
        "--out",
        table.as_str(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = trt(&["analyze", "--input", table.as_str(), "--level", "1e-1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("rows = 16"), "got:\n{text}");
    assert!(text.contains("curves = 2"));
    assert!(text.contains("slope = "), "got:\n{text}");
    assert!(text.contains("spacing rate 2 -> 4 at 1.0e-1:"), "got:\n{text}");
}

#[test]
fn analyze_rejects_a_level_outside_the_unit_interval() {
    let out = trt(&["analyze", "--input", "whatever.csv", "--level", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_names_the_line_of_a_malformed_row() {
    let table = TempFile::new("malformed.csv");
    std::fs::write(
        &table.0,
        "scheme,m,n,rate_bpcu,snr_db,p_outage,ci_lo,ci_hi,samples,hits,region,flagged\n\
         mimo,2,2,4.0000000000000000e0,1.0000000000000000e1,1.0000000000000000e-1,9.0000000000000002e-2,1.1000000000000000e-1,10000,1000,0,false\n\
         mimo,2,2,oops,1.2000000000000000e1,1.0000000000000000e-1,9.0000000000000002e-2,1.1000000000000000e-1,10000,1000,0,false\n",
    )
    .unwrap();
    let out = trt(&["analyze", "--input", table.as_str()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line 3"), "got: {err}");
}

#[test]
fn verify_identities_passes() {
    let out = trt(&["verify", "identities"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("PASS identities"));
}

#[test]
fn verify_exponent_passes_and_rejects_bad_ratios() {
    let out = trt(&["verify", "exponent", "--ratio", "1.5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS exponent"));

    // k = 0 needs a ratio above 1; below it the operating region is wrong.
    let out = trt(&["verify", "exponent", "--ratio", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_siso_agrees_with_the_closed_form() {
    let out = trt(&[
        "verify",
        "siso",
        "--max-samples",
        "200000",
        "--target-hits",
        "2000",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS siso"));
}

#[test]
fn verify_gamma_agrees_with_the_closed_form() {
    let out = trt(&[
        "verify",
        "gamma",
        "--max-samples",
        "300000",
        "--target-hits",
        "500",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS gamma"));
}
