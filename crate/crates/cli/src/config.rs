// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON experiment configuration.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Curves,
    Simulate,
    Reconstruct,
    WignerDemo,
}

impl Pipeline {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Pipeline::Simulate)
    }

    fn default_alphas(self) -> Vec<f64> {
        match self {
            Pipeline::Curves => AlphaRange::default().values(),
            Pipeline::Simulate => vec![0.65],
            Pipeline::Reconstruct => Vec::new(),
            Pipeline::WignerDemo => vec![1.0],
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Curves => "curves",
            Pipeline::Simulate => "simulate",
            Pipeline::Reconstruct => "reconstruct",
            Pipeline::WignerDemo => "wigner-demo",
        })
    }
}

/// Inclusive grid start, start + step, ..., up to stop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for AlphaRange {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 1.5,
            step: 0.05,
        }
    }
}

impl AlphaRange {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| ((self.start + self.step * k as f64) * 1e12).round() / 1e12)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub max_iters: usize,
    pub ll_tol: f64,
    pub diag_tol: f64,
    /// Fold the detector efficiency into the POVM (η-corrected estimate).
    pub correct_efficiency: bool,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            max_iters: nla_core::TomographySettings::DEFAULT_MAX_ITERS,
            ll_tol: nla_core::TomographySettings::DEFAULT_LL_TOL,
            diag_tol: nla_core::TomographySettings::DEFAULT_DIAG_TOL,
            correct_efficiency: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerConfig {
    pub half_width: f64,
    pub points: usize,
}

impl Default for WignerConfig {
    fn default() -> Self {
        Self {
            half_width: nla_core::wigner::DEFAULT_HALF_WIDTH,
            points: nla_core::wigner::DEFAULT_POINTS,
        }
    }
}

fn default_g() -> f64 {
    2.0
}
fn default_lambda() -> f64 {
    0.05
}
fn default_reflectivity() -> f64 {
    0.05
}
fn default_eta() -> f64 {
    0.6
}
fn default_phases() -> usize {
    11
}
fn default_samples() -> usize {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub pipeline: Option<Pipeline>,
    /// Real input amplitudes |α|.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha_range: Option<AlphaRange>,
    #[serde(default = "default_g")]
    pub g: f64,
    /// Two-mode squeezing parameter of the addition stage.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Intensity reflectivity R of the subtraction tap.
    #[serde(default = "default_reflectivity", alias = "R")]
    pub reflectivity: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_phases")]
    pub phases: usize,
    /// Total homodyne samples per state, split evenly over the phases.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    /// Fock cutoff n_max for reconstruction.
    #[serde(default)]
    pub cutoff: Option<usize>,
    /// Quadrature CSV to reconstruct; its sidecar is `<stem>.meta.json`.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub tomography: TomographyConfig,
    #[serde(default)]
    pub wigner: WignerConfig,
}

/// A validated configuration with every default filled in.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub pipeline: Pipeline,
    pub config: ExperimentConfig,
    pub alphas: Vec<f64>,
    pub hash: String,
    pub output_dir: PathBuf,
}

impl Resolved {
    pub fn seed(&self) -> Option<u64> {
        self.config.seed
    }
}

fn invalid(field: &str, why: impl fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {why}"))
}

impl ExperimentConfig {
    /// Parses a config file, or the `config` object of a run manifest.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
        if let Some(inner) = value.get("config").filter(|_| value.get("config_sha256").is_some()) {
            return serde_json::from_value(inner.clone())
                .map_err(|e| CliError::Config(format!("manifest config: {e}")));
        }
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Applies command-line overrides, checks every field and pins the
    /// effective configuration.
    pub fn resolve(
        mut self,
        pipeline: Pipeline,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> Result<Resolved, CliError> {
        if let Some(p) = self.pipeline {
            if p != pipeline {
                return Err(invalid("pipeline", format!("config is for `{p}`, not `{pipeline}`")));
            }
        }
        self.pipeline = Some(pipeline);
        if seed.is_some() {
            self.seed = seed;
        }
        if pipeline.is_stochastic() && self.seed.is_none() {
            return Err(invalid("seed", format!("required by `{pipeline}` (or pass --seed)")));
        }
        let alphas = match (&self.alphas, &self.alpha_range) {
            (Some(_), Some(_)) => {
                return Err(invalid("alphas", "give either `alphas` or `alpha_range`, not both"))
            }
            (Some(a), None) => a.clone(),
            (None, Some(r)) => {
                if !(r.step > 0.0) || !(r.stop >= r.start) || !r.start.is_finite() || !r.stop.is_finite() {
                    return Err(invalid("alpha_range", "need finite start <= stop and step > 0"));
                }
                r.values()
            }
            (None, None) => pipeline.default_alphas(),
        };
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(invalid("alphas", format!("{a} is not a finite non-negative amplitude")));
        }
        if matches!(pipeline, Pipeline::Simulate | Pipeline::WignerDemo) && alphas.is_empty() {
            return Err(invalid("alphas", "at least one amplitude is required"));
        }
        if pipeline == Pipeline::Simulate {
            if let Some(a) = alphas.iter().find(|&&a| a == 0.0) {
                return Err(invalid("alphas", format!("{a}: the gain estimate needs a non-zero amplitude")));
            }
        }
        self.alphas = Some(alphas.clone());
        self.alpha_range = None;
        self.check_ranges(pipeline)?;

        let output_dir = out
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("nla-out"));
        let hash = hex::encode(Sha256::digest(serde_json::to_vec(&self).expect("config serializes")));
        Ok(Resolved {
            pipeline,
            config: self,
            alphas,
            hash,
            output_dir,
        })
    }

    fn check_ranges(&self, pipeline: Pipeline) -> Result<(), CliError> {
        if !(self.g > 1.0 && self.g.is_finite()) {
            return Err(invalid("g", format!("{} must be > 1", self.g)));
        }
        if !(self.lambda > 0.0 && self.lambda <= nla_core::physical::MAX_SQUEEZING) {
            return Err(invalid("lambda", format!("{} must be in (0, 0.3]", self.lambda)));
        }
        if !(self.reflectivity > 0.0 && self.reflectivity < 0.5) {
            return Err(invalid("reflectivity", format!("{} must be in (0, 0.5)", self.reflectivity)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid("eta", format!("{} must be in (0, 1]", self.eta)));
        }
        if self.phases < 1 {
            return Err(invalid("phases", "must be at least 1"));
        }
        if self.samples < 1 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if self.samples < self.phases {
            return Err(invalid("samples", format!("{} is fewer than one per phase", self.samples)));
        }
        if let Some(c) = self.cutoff {
            if c < 1 {
                return Err(invalid("cutoff", "n_max must be at least 1"));
            }
        }
        let t = &self.tomography;
        if t.max_iters < 1 {
            return Err(invalid("tomography.max_iters", "must be at least 1"));
        }
        if !(t.ll_tol > 0.0) || !(t.diag_tol > 0.0) {
            return Err(invalid("tomography", "tolerances must be > 0"));
        }
        if !(self.wigner.half_width > 0.0) || self.wigner.points < 2 {
            return Err(invalid("wigner", "need half_width > 0 and at least 2 points"));
        }
        if pipeline == Pipeline::Reconstruct && self.dataset.is_none() {
            return Err(invalid("dataset", "required by `reconstruct`"));
        }
        Ok(())
    }
}
