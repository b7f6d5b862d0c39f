//! Machine-readable check results.

use serde::{Deserialize, Serialize};

/// Version of every JSON document emitted by the crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of a single verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub detail: serde_json::Value,
}

impl CheckResult {
    /// Pass iff `deviation <= tolerance` (NaN fails).
    pub fn from_deviation(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: deviation <= tolerance,
            max_deviation: deviation,
            tolerance,
            detail: serde_json::Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {} (deviation {:.3e}, tolerance {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_deviation,
            self.tolerance
        )
    }
}

/// Collection of checks from one suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub config: serde_json::Value,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, config: serde_json::Value) -> Self {
        Self { schema_version: SCHEMA_VERSION, suite: suite.into(), config, checks: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
