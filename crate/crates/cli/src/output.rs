// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Output files stamped with the config hash and seed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Stage};

pub struct Outputs {
    root: PathBuf,
    hash: String,
    seed: Option<u64>,
    files: Vec<String>,
}

impl Outputs {
    pub fn create(root: &Path, hash: &str, seed: Option<u64>) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(CliError::io(root))?;
        Ok(Self {
            root: root.to_path_buf(),
            hash: hash.to_string(),
            seed,
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Relative paths written so far, in order.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn open(&mut self, rel: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        }
        let file = File::create(&path).map_err(CliError::io(&path))?;
        self.files.push(rel.to_string());
        Ok((path, BufWriter::new(file)))
    }

    fn seed_text(&self) -> String {
        self.seed.map_or_else(|| "none".to_string(), |s| s.to_string())
    }

    /// Writes `# config_sha256=.. seed=..` and then whatever `body` emits.
    pub fn csv(
        &mut self,
        rel: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> nla_core::Result<()>,
    ) -> Result<(), CliError> {
        let header = format!("# config_sha256={} seed={}\n", self.hash, self.seed_text());
        let (path, mut w) = self.open(rel)?;
        w.write_all(header.as_bytes()).map_err(CliError::io(&path))?;
        body(&mut w).stage("output")?;
        w.flush().map_err(CliError::io(&path))
    }

    /// Pretty JSON object with `config_sha256` and `seed` fields added.
    pub fn json(&mut self, rel: &str, doc: &impl Serialize) -> Result<(), CliError> {
        let mut value = serde_json::to_value(doc).map_err(|e| CliError::Data {
            stage: "output",
            source: e.into(),
        })?;
        if let Value::Object(map) = &mut value {
            map.insert("config_sha256".into(), Value::String(self.hash.clone()));
            map.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        }
        self.raw_json(rel, &value)
    }

    /// JSON produced by a core writer, re-stamped with the provenance fields.
    pub fn json_from(
        &mut self,
        rel: &str,
        body: impl FnOnce(&mut Vec<u8>) -> nla_core::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        body(&mut buf).stage("output")?;
        let value: Value = serde_json::from_slice(&buf).map_err(|e| CliError::Data {
            stage: "output",
            source: e.into(),
        })?;
        self.json(rel, &value)
    }

    fn raw_json(&mut self, rel: &str, value: &Value) -> Result<(), CliError> {
        let (path, mut w) = self.open(rel)?;
        serde_json::to_writer_pretty(&mut w, value)
            .map_err(|e| CliError::io(&path)(e.into()))?;
        w.write_all(b"\n").map_err(CliError::io(&path))?;
        w.flush().map_err(CliError::io(&path))
    }

    pub fn dataset(&mut self, stem: &str, data: &nla_core::QuadratureDataset) -> Result<(), CliError> {
        self.csv(&format!("{stem}.csv"), |w| data.write_csv(w))?;
        self.json(&format!("{stem}.meta.json"), data.metadata())
    }
}
