// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Configuration-driven runner for the `nla` binary.
//!
//! Every pipeline writes into one output directory: CSV files start with a
//! `# config_sha256=<hex> seed=<n|none>` line, JSON files carry the same two
//! fields, and `manifest.json` holds the effective configuration. Feeding a
//! manifest back through `--config` reproduces the run byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod pipelines;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Pipeline, Resolved};
pub use error::CliError;
pub use pipelines::RunSummary;

/// Loads `config_path`, applies overrides and runs `pipeline`.
pub fn run(
    pipeline: Pipeline,
    config_path: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<RunSummary, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(CliError::io(config_path))?;
    let resolved = ExperimentConfig::from_json(&text)?.resolve(pipeline, seed, out)?;
    pipelines::run(&resolved)
}
