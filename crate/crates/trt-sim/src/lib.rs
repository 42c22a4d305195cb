//! Simulation companion to `trt-core`: the Monte-Carlo engine, sweep
//! configuration, result tables, and the `trt` command-line interface.
//!
//! `trt-core` holds the pure numerics (channels, outage events, the
//! analytic predictor); this crate adds everything that needs an
//! operating system: threads, files, environment, and argument parsing.

pub mod cli;
pub mod config;
pub mod engine;
pub mod table;

use thiserror::Error;

/// Errors produced by the simulation layer.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] trt_core::Error),
    #[error(transparent)]
    Table(#[from] table::TableError),
    #[error("configuration: {0}")]
    Config(String),
}
