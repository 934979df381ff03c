use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use susyj::operators::GridSpec;
use susyj::quadrature::QuadratureSpec;

use crate::config::ParamValue;

/// One numeric claim: `measured` against `tolerance`, with the uncertainty of `measured` itself
/// (quadrature error or extrapolation spread; 0 for direct grid evaluations).
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, measured: f64, error: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            error,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
        }
    }

    pub fn above(name: impl Into<String>, measured: f64, error: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            error,
            tolerance: threshold,
            passed: measured.is_finite() && measured > threshold,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub status: Status,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SuiteResult {
    pub fn from_checks(checks: Vec<Check>, details: Value) -> Self {
        let status = if checks.iter().all(|c| c.passed) {
            Status::Pass
        } else {
            Status::Fail
        };
        SuiteResult {
            status,
            checks,
            details,
            notes: Vec::new(),
        }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        SuiteResult {
            status: Status::Skipped,
            checks: Vec::new(),
            details: Value::Null,
            notes: vec![reason.into()],
        }
    }

    pub fn failed(reason: impl Into<String>) -> Self {
        SuiteResult {
            status: Status::Fail,
            checks: Vec::new(),
            details: Value::Null,
            notes: vec![reason.into()],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelInfo {
    pub name: String,
    pub params: BTreeMap<String, ParamValue>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub version: String,
    pub grid: GridSpec,
    pub quadrature: QuadratureSpec,
    pub tolerances: BTreeMap<String, f64>,
    /// No randomness is involved in a run; kept for schema stability.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub passed: bool,
    pub model: ModelInfo,
    pub provenance: Provenance,
    pub suites: BTreeMap<String, SuiteResult>,
}

impl Report {
    pub fn verdict(suites: &BTreeMap<String, SuiteResult>) -> bool {
        suites.values().all(|s| s.status != Status::Fail)
    }

    pub fn csv_rows(&self) -> Vec<[String; 6]> {
        let mut rows = Vec::new();
        for (suite, r) in &self.suites {
            for c in &r.checks {
                rows.push([
                    suite.clone(),
                    c.name.clone(),
                    format!("{:e}", c.measured),
                    format!("{:e}", c.error),
                    format!("{:e}", c.tolerance),
                    c.passed.to_string(),
                ]);
            }
        }
        rows
    }
}

pub const CHECK_HEADER: [&str; 6] = ["suite", "check", "measured", "error", "tolerance", "passed"];

/// One row of a sweep summary.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: ParamValue,
    pub passed: bool,
    pub suites: BTreeMap<String, Status>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub axis: String,
    pub passed: bool,
    pub summary: Vec<SweepRow>,
    pub reports: Vec<Report>,
}
