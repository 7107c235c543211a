//! JSON report envelope shared by every pipeline.

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const TOOL: &str = "embezzle-lab";

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub check: String,
    pub deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub tolerance: f64,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// First violated check, in report order.
    pub failure: Option<Failure>,
    pub data: Value,
}

/// Collects named deviations against one tolerance.
#[derive(Debug, Default)]
pub struct Checks {
    tolerance: f64,
    items: Vec<Check>,
}

impl Checks {
    pub fn new(tolerance: f64) -> Self {
        Checks { tolerance, items: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, deviation: f64) {
        self.push_with(name, deviation, self.tolerance);
    }

    /// A check with its own limit, for quantities whose bound is not the run
    /// tolerance (e.g. round trips on inexact protocols).
    pub fn push_with(&mut self, name: impl Into<String>, deviation: f64, tolerance: f64) {
        self.items.push(Check { name: name.into(), deviation, tolerance, pass: deviation <= tolerance });
    }

    /// A yes/no property recorded as deviation 0 or 1.
    pub fn flag(&mut self, name: impl Into<String>, holds: bool) {
        self.push(name, if holds { 0.0 } else { 1.0 });
    }

    pub fn into_report(self, config: &RunConfig, data: Value) -> Report {
        let failure = self.items.iter().find(|c| !c.pass).map(|c| Failure {
            check: c.name.clone(),
            deviation: c.deviation,
            tolerance: c.tolerance,
        });
        Report {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command: config.command.clone(),
            config: config.clone(),
            seed: config.seed,
            tolerance: config.tolerance,
            pass: failure.is_none(),
            checks: self.items,
            failure,
            data,
        }
    }
}
