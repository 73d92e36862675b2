use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckRecord {
    /// Passes when `residual <= tolerance`.
    pub fn bounded(name: impl Into<String>, residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            detail: detail.into(),
        }
    }

    /// Boolean check; residual is 0 on success and 1 on failure.
    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            residual: if passed { 0.0 } else { 1.0 },
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub library_version: String,
    pub checks: Vec<CheckRecord>,
    pub outputs: Vec<String>,
    pub passed: bool,
    pub wall_time_secs: f64,
}

impl RunManifest {
    /// Writes pretty JSON with keys in sorted order.
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        // serde_json's Value map is ordered by key, so a round trip through
        // Value sorts every object.
        let value = serde_json::to_value(self).map_err(|e| CliError::Failure(e.to_string()))?;
        let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Failure(e.to_string()))?;
        write_file(path, &(text + "\n"))
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Failure(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

/// CSV builder with a fixed header; numbers use Rust's shortest round-trip
/// formatting so output is byte-stable.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self {
            text: format!("{header}\n"),
            columns: header.split(',').count(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn save(&self, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
        let path = dir.join(name);
        write_file(&path, &self.text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_keys_are_sorted() {
        let m = RunManifest {
            command_line: vec!["x".into()],
            config: BTreeMap::from([("zeta".into(), "1".into()), ("alpha".into(), "2".into())]),
            seed: Some(3),
            library_version: "0".into(),
            checks: vec![CheckRecord::bounded("c", 0.5, 1.0, "")],
            outputs: vec![],
            passed: true,
            wall_time_secs: 0.0,
        };
        let value = serde_json::to_value(&m).unwrap();
        let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        let text = serde_json::to_string(&value).unwrap();
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
        assert!(m.checks[0].passed && !CheckRecord::bounded("c", 2.0, 1.0, "").passed);
    }
}
