use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One pass/fail line, always carrying the measured value next to its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// `"<"`, `"<="` or `"=="`.
    pub relation: String,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation: "<".into(),
            tolerance,
            passed: measured < tolerance,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation: "<=".into(),
            tolerance,
            passed: measured <= tolerance,
        }
    }

    pub fn equals(name: impl Into<String>, measured: f64, expected: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation: "==".into(),
            tolerance: expected,
            passed: measured == expected,
        }
    }
}

/// Machine-readable result of one command. Wall-clock time is kept out of
/// the serialized form so identical runs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub args: Vec<String>,
    pub parameters: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub statistics: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transcripts: Vec<Value>,
    pub passed: bool,
    #[serde(skip)]
    pub duration: Duration,
}

impl RunReport {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            args,
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            statistics: BTreeMap::new(),
            transcripts: Vec::new(),
            passed: true,
            duration: Duration::ZERO,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    pub fn stat(&mut self, key: &str, value: impl Into<Value>) {
        self.statistics.insert(key.to_string(), value.into());
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "catswap {}", self.command);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "  {k:<12} {v}");
        }
        if !self.checks.is_empty() {
            let _ = writeln!(out);
            let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            for c in &self.checks {
                let _ = writeln!(
                    out,
                    "  {}  {:<width$}  {:>12.6e} {:>2} {:e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.relation,
                    c.tolerance,
                );
            }
        }
        if !self.statistics.is_empty() {
            let _ = writeln!(out);
            for (k, v) in &self.statistics {
                let _ = writeln!(out, "  {k:<24} {v}");
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "  {} in {:.3}s",
            if self.passed { "all checks passed" } else { "CHECKS FAILED" },
            self.duration.as_secs_f64()
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_identical() {
        let mut r = RunReport::new("verify", vec!["--d".into(), "2".into()]);
        r.param("d", 2);
        r.check(Check::below("rule bell", 1.2345678901234567e-16, 1e-9));
        r.check(Check::equals("rate", 1.0, 1.0));
        r.stat("cases", 16);
        let json = r.to_json();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn failing_check_marks_report() {
        let mut r = RunReport::new("verify", vec![]);
        r.check(Check::below("x", 1.0, 0.5));
        assert!(!r.passed);
        assert!(r.to_table().contains("FAIL"));
    }
}
