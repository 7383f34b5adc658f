//! Run manifests: the command, every resolved parameter and a SHA-256 of
//! each output, as `key = value` text.
//!
//! ```text
//! format = 1
//! version = 0.1.0
//! command = figure2
//! param.seed = 42
//! param.rounds = 1000
//! output.figure2_additive.csv = 3b0c...
//! ```

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST_FORMAT: &str = "1";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    /// Resolved parameters in CLI flag form, in order.
    pub params: Vec<(String, String)>,
    /// Output file names and their SHA-256 digests.
    pub outputs: Vec<(String, String)>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            params: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn record_output(&mut self, name: &str, bytes: &[u8]) {
        self.outputs.push((name.to_string(), sha256_hex(bytes)));
    }

    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let mut m = RunManifest::default();
        let mut format = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let err = |message: String| ManifestError::Parse { line, message };
            let (key, value) = raw
                .split_once(" = ")
                .ok_or_else(|| err("expected `key = value`".into()))?;
            if let Some(name) = key.strip_prefix("param.") {
                m.params.push((name.to_string(), value.to_string()));
            } else if let Some(name) = key.strip_prefix("output.") {
                m.outputs.push((name.to_string(), value.to_string()));
            } else {
                match key {
                    "format" => format = Some(value.to_string()),
                    "version" => m.version = value.to_string(),
                    "command" => m.command = value.to_string(),
                    _ => return Err(err(format!("unknown key `{key}`"))),
                }
            }
        }
        match format.as_deref() {
            Some(MANIFEST_FORMAT) => {}
            other => {
                return Err(ManifestError::Parse {
                    line: 1,
                    message: format!("unsupported manifest format {other:?}"),
                })
            }
        }
        if m.command.is_empty() {
            return Err(ManifestError::Parse {
                line: 1,
                message: "missing `command`".into(),
            });
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self, ManifestError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::write(dir.join(MANIFEST_FILE), self.to_string())
    }

    /// Outputs in `dir` whose digest differs from the recorded one.
    pub fn mismatches(&self, dir: &Path) -> io::Result<Vec<String>> {
        let mut bad = Vec::new();
        for (name, digest) in &self.outputs {
            match fs::read(dir.join(name)) {
                Ok(bytes) if &sha256_hex(&bytes) == digest => {}
                Ok(_) => bad.push(name.clone()),
                Err(e) if e.kind() == io::ErrorKind::NotFound => bad.push(name.clone()),
                Err(e) => return Err(e),
            }
        }
        Ok(bad)
    }
}

impl fmt::Display for RunManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "format = {MANIFEST_FORMAT}")?;
        writeln!(f, "version = {}", self.version)?;
        writeln!(f, "command = {}", self.command)?;
        for (k, v) in &self.params {
            writeln!(f, "param.{k} = {v}")?;
        }
        for (k, v) in &self.outputs {
            writeln!(f, "output.{k} = {v}")?;
        }
        Ok(())
    }
}
