//! Shared report types. Every check emits a `CheckReport`; the CLI prints
//! one JSON object per check, so field order here is the wire format.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The grid under-resolves an existence guarantee: not a failed
    /// property, and reported with its own exit code.
    ResolutionExhausted,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// First rule violation encountered, in deterministic probe order.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub rule: String,
    pub location: Vec<f64>,
    pub detail: String,
}

/// A labeled point that substantiates the verdict (extension pairs, missed
/// probes, equality-set nodes, ...).
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub label: String,
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    /// Citation anchoring the check to the literature (theorem or identity).
    pub anchor: String,
    pub verdict: Verdict,
    /// The tolerance actually used, after any CLI scaling.
    pub tol: f64,
    /// Number of probes examined.
    pub probes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Violation>,
    pub witnesses: Vec<Witness>,
    /// Structured per-check payload (agreement matrices, coverage tables).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl CheckReport {
    pub fn new(check: &str, anchor: &str, tol: f64) -> Self {
        CheckReport {
            check: check.to_string(),
            anchor: anchor.to_string(),
            verdict: Verdict::Pass,
            tol,
            probes: 0,
            first_violation: None,
            witnesses: Vec::new(),
            detail: None,
        }
    }

    /// Records a violation; only the first one is kept.
    pub fn violate(&mut self, rule: &str, location: Vec<f64>, detail: String) {
        self.verdict = Verdict::Fail;
        if self.first_violation.is_none() {
            self.first_violation = Some(Violation {
                rule: rule.to_string(),
                location,
                detail,
            });
        }
    }

    pub fn witness(&mut self, label: &str, point: Vec<f64>, value: f64) {
        self.witnesses.push(Witness {
            label: label.to_string(),
            point,
            value,
        });
    }
}
