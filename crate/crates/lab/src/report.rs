//! Report schema `v1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "v1";

/// Everything needed to rerun an experiment bit for bit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: String,
    /// Decimal `u64` or 64 hex digits.
    pub seed: String,
    /// Overrides the experiment's main trial count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(experiment: &str, seed: &str) -> Self {
        Self { experiment: experiment.into(), seed: seed.into(), trials: None, params: BTreeMap::new() }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `|observed - expected| <= tolerance`.
    Within,
    /// `observed <= expected`.
    AtMost,
    /// `observed >= expected`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub rule: Rule,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn within(name: &str, observed: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (observed - expected).abs() <= tolerance;
        Self { name: name.into(), rule: Rule::Within, observed, expected, tolerance, pass }
    }

    /// `observed` within `sigmas` standard errors of `expected`.
    pub fn sigmas(name: &str, observed: f64, expected: f64, stderr: f64, sigmas: f64) -> Self {
        Self::within(name, observed, expected, sigmas * stderr)
    }

    pub fn at_most(name: &str, observed: f64, bound: f64) -> Self {
        Self { name: name.into(), rule: Rule::AtMost, observed, expected: bound, tolerance: 0.0, pass: observed <= bound }
    }

    pub fn at_least(name: &str, observed: f64, bound: f64) -> Self {
        Self { name: name.into(), rule: Rule::AtLeast, observed, expected: bound, tolerance: 0.0, pass: observed >= bound }
    }

    /// A boolean property, reported as `1 >= 1` or `0 >= 1`.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub config: RunConfig,
    pub records: Vec<Value>,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
    pub elapsed_s: f64,
    pub pass: bool,
}

impl Report {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn within_time(&self) -> bool {
        self.time_limit_s.is_none_or(|t| self.elapsed_s <= t)
    }

    /// The report with wall-clock fields cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self { elapsed_s: 0.0, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One line: `PASS name (checks passed/total, elapsed)`.
    pub fn status_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.pass).count();
        format!(
            "{} {} ({}/{} checks, {:.2}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.config.experiment,
            ok,
            self.checks.len(),
            self.elapsed_s
        )
    }
}
