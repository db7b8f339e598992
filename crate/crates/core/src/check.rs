//! Named pass/fail outcomes shared by certificates and reports.

use serde::{Deserialize, Serialize};

/// One evaluated invariant.
///
/// `required` checks decide whether the enclosing result passes;
/// informational ones are reported but never fail a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub invariant: String,
    pub passed: bool,
    pub required: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, invariant: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            invariant: invariant.to_string(),
            passed,
            required: true,
            detail: detail.into(),
        }
    }

    pub fn info(name: &str, invariant: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            required: false,
            ..Check::new(name, invariant, passed, detail)
        }
    }
}

pub fn all_required_pass(checks: &[Check]) -> bool {
    checks.iter().filter(|c| c.required).all(|c| c.passed)
}

/// `a >= b` up to a relative slack of `1e-9`.
pub fn ge_slack(a: f64, b: f64) -> bool {
    a >= b - 1e-9 * b.abs().max(1.0)
}

/// `a <= b` up to a relative slack of `1e-9`.
pub fn le_slack(a: f64, b: f64) -> bool {
    a <= b + 1e-9 * b.abs().max(1.0)
}
