// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Numerical {
        stage: &'static str,
        source: nla_core::Error,
    },
    #[error("{stage}: self-check failed: {message}")]
    SelfCheck {
        stage: &'static str,
        message: String,
    },
    #[error("{stage}: {source}")]
    Data {
        stage: &'static str,
        source: nla_core::Error,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } | CliError::SelfCheck { .. } => 3,
            CliError::Data { .. } | CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Attributes a core error to a pipeline stage.
pub(crate) trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for nla_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        use nla_core::Error as E;
        self.map_err(|source| match source {
            E::InvalidParameter { .. } => CliError::Config(format!("{stage}: {source}")),
            E::Io(_) | E::Csv(_) | E::Json(_) | E::Format(_) => CliError::Data { stage, source },
            _ => CliError::Numerical { stage, source },
        })
    }
}
