//! Structured pass/fail records for identity and property checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// How `measured` is compared with `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    /// `max_k |m_k − e_k| ≤ tol`.
    MaxAbs,
    /// `max_k |m_k − e_k| / |e_k| ≤ tol`.
    MaxRelative,
    /// `m_k ≥ e_k − tol` for every k.
    AtLeast,
    /// `m_k ≤ e_k + tol` for every k.
    AtMost,
}

impl Norm {
    pub fn passes(self, measured: &[f64], expected: &[f64], tol: f64) -> bool {
        if measured.len() != expected.len() || measured.is_empty() {
            return false;
        }
        measured.iter().zip(expected).all(|(&m, &e)| {
            if !m.is_finite() {
                return false;
            }
            match self {
                Norm::MaxAbs => (m - e).abs() <= tol,
                Norm::MaxRelative => (m - e).abs() <= tol * e.abs(),
                Norm::AtLeast => m >= e - tol,
                Norm::AtMost => m <= e + tol,
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    /// Short description of the statement being verified.
    pub anchor: String,
    pub measured: Vec<f64>,
    pub expected: Vec<f64>,
    /// Where the expected values come from (closed form, identity, numerical oracle, …).
    pub provenance: String,
    pub tolerance: f64,
    pub norm: Norm,
    pub pass: bool,
    pub runtime_ms: f64,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl VerificationReport {
    pub fn compare(
        check: impl Into<String>,
        anchor: impl Into<String>,
        measured: Vec<f64>,
        expected: Vec<f64>,
        provenance: impl Into<String>,
        tolerance: f64,
        norm: Norm,
    ) -> Self {
        let pass = norm.passes(&measured, &expected, tolerance);
        Self {
            check: check.into(),
            anchor: anchor.into(),
            measured,
            expected,
            provenance: provenance.into(),
            tolerance,
            norm,
            pass,
            runtime_ms: 0.0,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_runtime(mut self, started: std::time::Instant) -> Self {
        self.runtime_ms = started.elapsed().as_secs_f64() * 1e3;
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.metadata.insert(key.to_string(), v);
        self
    }

    /// Fails the report regardless of the comparison, recording why.
    pub fn force_fail(mut self, reason: &str) -> Self {
        self.pass = false;
        self.metadata
            .insert("failure".into(), serde_json::Value::String(reason.into()));
        self
    }

    /// One-line summary `PASS|FAIL check: measured vs expected`.
    pub fn summary(&self) -> String {
        format!(
            "{} {}: measured {:?} expected {:?} ({:?}, tol {:e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.measured,
            self.expected,
            self.norm,
            self.tolerance
        )
    }
}
