//! Machine-readable verification reports.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self::scaled(name, residual, 1.0, tolerance)
    }

    pub fn scaled(name: impl Into<String>, residual: f64, scale: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            scale,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    /// A boolean property recorded as residual 0 (holds) or 1 (fails).
    pub fn flag(name: impl Into<String>, holds: bool) -> Self {
        Self::new(name, if holds { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub anchor: String,
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub runtime_ms: u64,
    pub config_hash: String,
}

impl VerificationReport {
    pub fn new(suite: &str, anchor: &str, family: &str) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            suite: suite.into(),
            anchor: anchor.into(),
            family: family.into(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            runtime_ms: 0,
            config_hash: String::new(),
        }
    }

    pub fn param(mut self, k: &str, v: f64) -> Self {
        self.params.insert(k.into(), v);
        self
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .chain(self.checks.iter())
            .max_by(|a, b| {
                let ra = a.residual / a.tolerance.max(f64::MIN_POSITIVE);
                let rb = b.residual / b.tolerance.max(f64::MIN_POSITIVE);
                ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Equal)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_is_residual_within_tolerance() {
        let mut r = VerificationReport::new("x", "y", "cj");
        r.push(Check::new("ok", 1e-12, 1e-10));
        assert!(r.passed());
        r.push(Check::new("bad", 1e-8, 1e-10));
        assert!(!r.passed());
        assert_eq!(r.worst().unwrap().name, "bad");
        r.push(Check::new("nan", f64::NAN, 1e-10));
        assert!(!r.checks[2].pass);
    }
}
