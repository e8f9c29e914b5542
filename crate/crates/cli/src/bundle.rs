//! Output directory, atomic file writes and the summary record.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    /// Measured quantity, when there is one.
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub parameters: Value,
    pub seeds: BTreeMap<String, u64>,
    pub truncations: BTreeMap<String, usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub truncation_bounds: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

/// Collects artifacts for one experiment run.
pub struct Bundle {
    dir: PathBuf,
    summary: Summary,
}

impl Bundle {
    pub fn create(dir: &Path, experiment: &str, parameters: Value) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Output(format!("{}: {e}", dir.display())))?;
        Ok(Bundle {
            dir: dir.to_path_buf(),
            summary: Summary {
                experiment: experiment.to_string(),
                passed: true,
                assertions: Vec::new(),
                parameters,
                seeds: BTreeMap::new(),
                truncations: BTreeMap::new(),
                tolerances: BTreeMap::new(),
                truncation_bounds: BTreeMap::new(),
                files: Vec::new(),
            },
        })
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), HarnessError> {
        let fail = |e: std::io::Error| HarnessError::Output(format!("{}: {e}", self.dir.join(name).display()));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(fail)?;
        tmp.write_all(contents.as_bytes()).map_err(fail)?;
        tmp.persist(self.dir.join(name)).map_err(|e| fail(e.error))?;
        self.summary.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, v: &impl Serialize) -> Result<(), HarnessError> {
        let text = serde_json::to_string_pretty(v).expect("serializable artifact");
        self.write(name, &(text + "\n"))
    }

    pub fn check(&mut self, name: &str, passed: bool, value: Option<f64>, tolerance: Option<f64>, detail: impl Into<String>) {
        self.summary.passed &= passed;
        self.summary.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            value,
            tolerance,
            detail: detail.into(),
        });
    }

    pub fn seed(&mut self, name: &str, s: u64) {
        self.summary.seeds.insert(name.to_string(), s);
    }

    pub fn truncation(&mut self, name: &str, n: usize) {
        self.summary.truncations.insert(name.to_string(), n);
    }

    pub fn tolerance(&mut self, name: &str, t: f64) {
        self.summary.tolerances.insert(name.to_string(), t);
    }

    pub fn truncation_bound(&mut self, name: &str, b: f64) {
        self.summary.truncation_bounds.insert(name.to_string(), b);
    }

    /// Writes `summary.json` and hands back the record.
    pub fn finish(mut self) -> Result<Summary, HarnessError> {
        self.summary.files.push("summary.json".into());
        let summary = self.summary.clone();
        let text = serde_json::to_string_pretty(&summary).expect("serializable summary");
        let fail = |e: std::io::Error| HarnessError::Output(format!("{}: {e}", self.dir.display()));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(fail)?;
        tmp.write_all((text + "\n").as_bytes()).map_err(fail)?;
        tmp.persist(self.dir.join("summary.json")).map_err(|e| fail(e.error))?;
        Ok(summary)
    }
}
