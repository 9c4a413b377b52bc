//! Dataset input and output: LIBSVM files, summaries, synthetic generators
//! and flat `key=value` metadata.

mod libsvm;
mod summary;
mod synth;

use std::fmt::Display;
use std::fs;
use std::path::Path;

pub use libsvm::{parse_libsvm, read_libsvm_file, write_libsvm, ParseOptions};
pub use summary::{summarize, DatasetSummary};
pub use synth::{synth_least_squares, synth_logistic, LeastSquaresSpec, SyntheticSpec};

use crate::error::{Error, Result};

/// Ordered `key=value` pairs. Lists are stored comma-separated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_list(&mut self, key: &str, values: &[f64]) {
        let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.entries.push((key.to_string(), joined.join(",")));
    }

    /// Last value stored under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_list(&self, key: &str) -> Option<Vec<f64>> {
        let v = self.get(key)?;
        if v.is_empty() {
            return Some(Vec::new());
        }
        v.split(',').map(|t| t.trim().parse().ok()).collect()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// Parses `key=value` lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key=value, got '{line}'"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(Metadata { entries })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Metadata::parse(&fs::read_to_string(path)?)
    }
}
