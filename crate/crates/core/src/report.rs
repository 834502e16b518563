//! Verification reports and their JSON and text renderings.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub samples: usize,
    /// Non-finite residuals are stored as `f64::MAX` so the JSON stays valid.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    /// Zero unless timing was requested, so reports stay byte-stable.
    pub wall_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(Error::ParseError(format!("unknown format `{other}`"))),
        }
    }
}

pub fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

impl VerificationReport {
    pub fn new(scenario: impl Into<String>, seed: u64) -> Self {
        Self {
            scenario: scenario.into(),
            seed,
            checks: Vec::new(),
            wall_ms: 0,
            warnings: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::ParseError(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scenario: {}    seed: {}    wall_ms: {}",
            self.scenario, self.seed, self.wall_ms
        );
        let _ = writeln!(
            out,
            "{:<40} {:>7} {:>12} {:>10}  {:<4}  anchor",
            "check", "samples", "max_resid", "tolerance", "pass"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<40} {:>7} {:>12.3e} {:>10.1e}  {:<4}  {}",
                c.id,
                c.samples,
                c.max_residual,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" },
                c.anchor
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let total = self.checks.len();
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", total, failed);
        out
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Text => Ok(self.to_text()),
        }
    }
}

/// Writes the rendered report to `path`, or returns it for stdout.
pub fn emit_report(
    report: &VerificationReport,
    format: Format,
    path: Option<&Path>,
) -> Result<String> {
    let text = report.render(format)?;
    if let Some(p) = path {
        std::fs::write(p, &text)?;
    }
    Ok(text)
}
