// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cutoff n_max={n_max} too small: tail probability {tail:e} is not below 1e-12")]
    CutoffTooSmall { n_max: usize, tail: f64 },

    #[error("truncation overflow: weight {weight:e} near the cutoff n_max={n_max}")]
    TruncationOverflow { n_max: usize, weight: f64 },

    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("invalid parameter {name}={value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{what} did not converge after {iterations} terms")]
    NonConvergent { what: &'static str, iterations: usize },

    #[error("grid too coarse: spacing {spacing} exceeds {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("grid too narrow: covers [{lo}, {hi}] but needs ±{required}")]
    GridTooNarrow { lo: f64, hi: f64, required: f64 },

    #[error("non-physical density matrix: {0}")]
    NonPhysical(String),

    #[error("empty data: {0}")]
    EmptyData(&'static str),

    #[error("unstable ratio: input mean {mean} is within {sigmas} standard errors of zero")]
    UnstableRatio { mean: f64, sigmas: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            expected,
        }
    }
}
