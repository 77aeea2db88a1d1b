//! JSON report assembly.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use tfv_core::classify::{ClassFlags, Witness};
use tfv_core::theorem::{Expectation, ObstructionReport};

use crate::config::RunConfig;

const MAX_WITNESSES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Pass,
    Fail,
    ReportOnly,
}

impl From<Expectation> for Expect {
    fn from(e: Expectation) -> Self {
        match e {
            Expectation::Pass => Expect::Pass,
            Expectation::Fail => Expect::Fail,
            Expectation::ReportOnly => Expect::ReportOnly,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessOut {
    pub coords: Vec<f64>,
    pub reason: String,
}

impl From<&Witness> for WitnessOut {
    fn from(w: &Witness) -> Self {
        WitnessOut { coords: w.coords.clone(), reason: w.reason.clone() }
    }
}

/// One entry of the `checks` array.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub pass: bool,
    pub expectation: Expect,
    pub as_expected: bool,
    /// A negative control whose failure is the expected outcome.
    pub expected_negative: bool,
    /// `null` when a point could not be evaluated.
    pub max_residual: f64,
    pub tolerance: f64,
    pub witnesses: Vec<WitnessOut>,
    pub details: BTreeMap<String, Value>,
}

impl Check {
    /// A check that passes when `max_residual < tolerance`.
    pub fn below(id: impl Into<String>, max_residual: f64, tolerance: f64) -> Self {
        Check::with_outcome(id, max_residual < tolerance, max_residual, tolerance)
    }

    /// A check that passes when `value > bound`.
    pub fn above(id: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::with_outcome(id, value > bound, value, bound)
    }

    pub fn with_outcome(id: impl Into<String>, pass: bool, max_residual: f64, tolerance: f64) -> Self {
        Check {
            id: id.into(),
            pass,
            expectation: Expect::Pass,
            as_expected: pass,
            expected_negative: false,
            max_residual,
            tolerance,
            witnesses: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    /// A check that could not run; it counts as failed.
    pub fn errored(id: impl Into<String>, reason: String) -> Self {
        let mut c = Check::with_outcome(id, false, f64::INFINITY, 0.0);
        c.details.insert("error".into(), Value::String(reason));
        c
    }

    pub fn expect(mut self, e: Expect) -> Self {
        self.expectation = e;
        self.as_expected = match e {
            Expect::Pass => self.pass,
            Expect::Fail => !self.pass,
            Expect::ReportOnly => true,
        };
        self.expected_negative = e == Expect::Fail;
        self
    }

    /// Marks a passing check as a confirmed negative control.
    pub fn negative_control(mut self) -> Self {
        self.expected_negative = true;
        self
    }

    pub fn detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn witnesses<'a>(mut self, w: impl IntoIterator<Item = &'a Witness>) -> Self {
        self.witnesses = w.into_iter().take(MAX_WITNESSES).map(WitnessOut::from).collect();
        self
    }

    pub fn from_obstruction(id: impl Into<String>, r: &ObstructionReport) -> Self {
        let mut c = Check::with_outcome(id, r.pass, r.max_residual, r.tolerance)
            .expect(r.expectation.into())
            .witnesses(&r.witnesses);
        c.details.insert("points".into(), r.residuals.len().into());
        c
    }
}

pub fn flags_value(f: &ClassFlags) -> Value {
    let map: serde_json::Map<String, Value> = f.named().iter().map(|(k, v)| (k.to_string(), Value::Bool(*v))).collect();
    Value::Object(map)
}

/// `f64` as JSON; non-finite values become strings so nothing is lost.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(x.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub as_expected: usize,
    pub unexpected: Vec<String>,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, checks: Vec<Check>, notes: Vec<String>) -> Self {
        let unexpected: Vec<String> = checks.iter().filter(|c| !c.as_expected).map(|c| c.id.clone()).collect();
        let exit_code = if unexpected.is_empty() { 0 } else { 1 };
        Report {
            tool: "tfv",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            summary: Summary { checks: checks.len(), as_expected: checks.len() - unexpected.len(), unexpected, exit_code },
            checks,
            notes,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectations_drive_exit_code() {
        let cfg = RunConfig::default();
        let ok = Check::below("a", 1e-9, 1e-8);
        let neg = Check::below("b", 1.0, 1e-8).expect(Expect::Fail);
        assert!(neg.as_expected && neg.expected_negative && !neg.pass);
        assert_eq!(Report::new("x", &cfg, vec![ok.clone(), neg], vec![]).exit_code(), 0);
        let bad = Check::below("c", 1.0, 1e-8);
        let r = Report::new("x", &cfg, vec![ok, bad], vec![]);
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.summary.unexpected, vec!["c".to_string()]);
    }

    #[test]
    fn non_finite_residual_serializes() {
        let c = Check::errored("e", "boom".into());
        let v = serde_json::to_value(&c).unwrap();
        assert!(v["max_residual"].is_null());
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
    }
}
