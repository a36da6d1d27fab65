//! Run metadata embedded in every output artifact: the resolved
//! configuration, the toolkit version and digests of every input file.
//! Deliberately no timestamps, so identical runs produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

#[derive(Debug, Default, Clone)]
pub struct RunMeta {
    entries: BTreeMap<String, String>,
}

impl RunMeta {
    pub fn new(command: &str) -> Self {
        let mut meta = RunMeta::default();
        meta.set("tool", "bipos");
        meta.set("version", env!("CARGO_PKG_VERSION"));
        meta.set("command", command);
        meta
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn digest_input(&mut self, label: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("cannot read input file {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        self.entries.insert(format!("sha256.{label}"), hex);
        self.entries.insert(format!("input.{label}"), path.display().to_string());
        Ok(())
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries.clone()
    }

    /// Leading `#` comment block for CSV outputs.
    pub fn csv_header(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out
    }

    pub fn json_value(&self) -> serde_json::Value {
        serde_json::to_value(&self.entries).expect("string map is serializable")
    }
}
