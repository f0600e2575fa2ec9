//! Machine-readable verification reports.

use serde::Serialize;

/// Where the expected value of a case comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    /// A value or relation stated in the source derivation.
    Paper,
    /// Immediate from the definitions.
    Trivial,
    /// Obtained here by an independent route.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub name: String,
    pub provenance: Provenance,
    pub expected: Option<f64>,
    pub computed: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Case {
    /// Pass iff `|computed − expected| ≤ tol · |expected|`.
    pub fn relative(
        name: impl Into<String>,
        provenance: Provenance,
        expected: f64,
        computed: f64,
        tol: f64,
    ) -> Self {
        let pass = (computed - expected).abs() <= tol * expected.abs();
        Self {
            name: name.into(),
            provenance,
            expected: Some(expected),
            computed,
            tol,
            pass,
        }
    }

    /// Pass iff `|computed − expected| ≤ tol`.
    pub fn absolute(
        name: impl Into<String>,
        provenance: Provenance,
        expected: f64,
        computed: f64,
        tol: f64,
    ) -> Self {
        let pass = (computed - expected).abs() <= tol;
        Self {
            name: name.into(),
            provenance,
            expected: Some(expected),
            computed,
            tol,
            pass,
        }
    }

    /// A case without a reference value; `pass` is decided by the caller.
    pub fn predicate(
        name: impl Into<String>,
        provenance: Provenance,
        computed: f64,
        tol: f64,
        pass: bool,
    ) -> Self {
        Self {
            name: name.into(),
            provenance,
            expected: None,
            computed,
            tol,
            pass,
        }
    }

    /// A case whose computation failed outright.
    pub fn failed(name: impl Into<String>, provenance: Provenance) -> Self {
        Self::predicate(name, provenance, f64::NAN, 0.0, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub cases: Vec<Case>,
    pub summary: Summary,
}

impl Report {
    /// Sorts cases by name and tallies the summary.
    pub fn new(suite: impl Into<String>, seed: u64, mut cases: Vec<Case>) -> Self {
        cases.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = cases.iter().filter(|c| c.pass).count();
        Self {
            suite: suite.into(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: None,
            summary: Summary {
                pass,
                fail: cases.len() - pass,
            },
            cases,
        }
    }

    pub fn with_timestamp(mut self, unix_seconds: u64) -> Self {
        self.timestamp = Some(unix_seconds);
        self
    }

    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_and_order() {
        let r = Report::new(
            "demo",
            7,
            vec![
                Case::relative("b", Provenance::Trivial, 1.0, 1.0, 0.0),
                Case::absolute("a", Provenance::Derived, 0.0, 0.5, 0.1),
            ],
        );
        assert_eq!(r.cases[0].name, "a");
        assert_eq!(r.summary, Summary { pass: 1, fail: 1 });
        let json = r.to_json();
        assert!(json.contains("\"provenance\": \"DERIVED\""));
        assert!(!json.contains("timestamp"));
    }
}
