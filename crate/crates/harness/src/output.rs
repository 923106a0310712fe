//! CSV tables and the JSON run summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::rate::RateFit;

/// A CSV table with a fixed header; cells are preformatted strings.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Locale-independent float cell.
pub fn num(x: f64) -> String {
    let mut s = String::new();
    write!(s, "{x:.15e}").unwrap();
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human readable condition, e.g. `<= -0.2`.
    pub condition: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitEntry {
    Fitted(RateFit),
    /// Every value is (numerically) zero, there is nothing to fit.
    Degenerate { reason: String },
    /// Too many failed realizations or an unusable point set.
    Invalid { reason: String },
}

impl FitEntry {
    pub fn slope(&self) -> Option<f64> {
        match self {
            FitEntry::Fitted(f) => Some(f.slope),
            _ => None,
        }
    }

    pub fn fit(&self) -> Option<&RateFit> {
        match self {
            FitEntry::Fitted(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub kind: String,
    pub pass: bool,
    pub realizations: usize,
    pub failures: usize,
    pub failure_diagnostics: Vec<String>,
    pub checks: Vec<Check>,
    pub fits: BTreeMap<String, FitEntry>,
    pub metrics: BTreeMap<String, f64>,
    pub config: ExperimentConfig,
}

impl Summary {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            kind: cfg.kind.to_string(),
            pass: true,
            realizations: cfg.realizations,
            failures: 0,
            failure_diagnostics: Vec::new(),
            checks: Vec::new(),
            fits: BTreeMap::new(),
            metrics: BTreeMap::new(),
            config: cfg.clone(),
        }
    }

    pub fn check(&mut self, name: &str, value: f64, condition: &str, pass: bool) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            condition: condition.to_string(),
            pass,
        });
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct StudyOutput {
    pub tables: Vec<Table>,
    pub summary: Summary,
    /// Extra artifacts (file name, contents), e.g. a checkpoint.
    pub files: Vec<(String, String)>,
}

impl StudyOutput {
    /// Writes `<table>.csv`, `summary.json` and extra files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            fs::write(&path, t.to_csv())?;
            written.push(path);
        }
        for (name, body) in &self.files {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
        }
        let path = dir.join("summary.json");
        let mut json = serde_json::to_string_pretty(&self.summary)?;
        json.push('\n');
        fs::write(&path, json)?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StudyKind;

    #[test]
    fn csv_layout() {
        let mut t = Table::new("gaps", &["N", "gap"]);
        t.push(vec!["8".into(), num(0.5)]);
        assert_eq!(t.to_csv(), "N,gap\n8,5.000000000000000e-1\n");
    }

    #[test]
    fn failing_check_fails_summary() {
        let mut s = Summary::new(&ExperimentConfig::new(StudyKind::Simulate));
        s.check("a", 1.0, "< 2", true);
        assert!(s.pass);
        s.check("b", 3.0, "< 2", false);
        assert!(!s.pass);
        assert_eq!(s.check_named("b").unwrap().value, 3.0);
    }
}
