//! Audit-report records shared by the verify suites: every printed identity
//! gets a check with a stable id, and discrepancies against what reference
//! texts print are "flagged" rather than "fail" (fail is reserved for
//! defects of this artifact).

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Flagged,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Flagged => "flagged",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub description: String,
    pub status: CheckStatus,
    pub lhs: String,
    pub rhs: String,
    pub tolerance: String,
    pub detail: String,
}

impl CheckRecord {
    pub fn new(
        id: &str,
        description: &str,
        status: CheckStatus,
        lhs: impl Into<String>,
        rhs: impl Into<String>,
        tolerance: &str,
        detail: impl Into<String>,
    ) -> Self {
        CheckRecord {
            id: id.to_string(),
            description: description.to_string(),
            status,
            lhs: lhs.into(),
            rhs: rhs.into(),
            tolerance: tolerance.to_string(),
            detail: detail.into(),
        }
    }

    /// Pass/fail on a boolean identity.
    pub fn exact(
        id: &str,
        description: &str,
        ok: bool,
        lhs: impl Into<String>,
        rhs: impl Into<String>,
        detail: impl Into<String>,
    ) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        CheckRecord::new(id, description, status, lhs, rhs, "exact", detail)
    }

    /// Pass/fail on a measured value against a bound.
    pub fn bounded(
        id: &str,
        description: &str,
        value: f64,
        bound: f64,
        rhs: impl Into<String>,
        detail: impl Into<String>,
    ) -> Self {
        let status = if value < bound {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckRecord::new(
            id,
            description,
            status,
            format!("{value:e}"),
            rhs,
            &format!("{bound:e}"),
            detail,
        )
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AuditReport {
    pub checks: Vec<CheckRecord>,
}

impl AuditReport {
    pub fn new() -> Self {
        AuditReport { checks: Vec::new() }
    }

    pub fn push(&mut self, record: CheckRecord) {
        assert!(
            self.checks.iter().all(|c| c.id != record.id),
            "duplicate check id {}",
            record.id
        );
        self.checks.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = CheckRecord>) {
        for r in records {
            self.push(r);
        }
    }

    /// Deterministic output order.
    pub fn sort(&mut self) {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn has_fail(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable listing, one line per check plus detail for anything
    /// that is not a plain pass.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("{:7} {}  {}\n", c.status.to_string(), c.id, c.description));
            if c.status != CheckStatus::Pass {
                out.push_str(&format!("        lhs: {}\n        rhs: {}\n", c.lhs, c.rhs));
                if !c.detail.is_empty() {
                    out.push_str(&format!("        {}\n", c.detail));
                }
            }
        }
        let fails = self.checks.iter().filter(|c| c.status == CheckStatus::Fail).count();
        let flagged = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Flagged)
            .count();
        out.push_str(&format!(
            "{} checks: {} pass, {} flagged, {} fail\n",
            self.checks.len(),
            self.checks.len() - fails - flagged,
            flagged,
            fails
        ));
        out
    }
}
