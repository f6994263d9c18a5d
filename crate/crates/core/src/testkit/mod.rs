//! Model, data and query test tiers, and CQ-driven test generation.

mod data;
mod model;
mod query;

use std::fmt;

use ontoforge_rdf::Iri;
use serde::{Deserialize, Serialize};

pub use data::run_data_tests;
pub use model::run_model_tests;
pub use query::{prepare_query, run_query_tests, unknown_iris, Expectation, TestCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckId {
    MissingDomain,
    MissingRange,
    SubclassCycle,
    UntypedIndividual,
    OrphanProperty,
    MissingLabel,
    DomainViolation,
    RangeViolation,
    LiteralOnObjectProperty,
    IriOnDataProperty,
}

impl CheckId {
    pub const MODEL: [CheckId; 6] = [
        CheckId::MissingDomain,
        CheckId::MissingRange,
        CheckId::SubclassCycle,
        CheckId::UntypedIndividual,
        CheckId::OrphanProperty,
        CheckId::MissingLabel,
    ];
    pub const DATA: [CheckId; 4] = [
        CheckId::DomainViolation,
        CheckId::RangeViolation,
        CheckId::LiteralOnObjectProperty,
        CheckId::IriOnDataProperty,
    ];
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PitfallFinding {
    pub check: CheckId,
    pub severity: Severity,
    pub subject: Iri,
    pub message: String,
}

pub fn error_count(findings: &[PitfallFinding]) -> usize {
    findings.iter().filter(|f| f.severity == Severity::Error).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseStatus {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub case_id: String,
    pub cq_id: String,
    pub status: CaseStatus,
    pub expected: String,
    pub actual: String,
}

/// Model and data tiers count one unit per check (failed iff it produced an
/// Error); the query tier counts one unit per case.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierResult {
    pub ran: bool,
    pub findings: Vec<PitfallFinding>,
    pub cases: Vec<CaseOutcome>,
    pub passes: usize,
    pub failures: usize,
    pub errors: usize,
}

impl TierResult {
    pub fn total(&self) -> usize {
        self.passes + self.failures + self.errors
    }

    pub fn from_findings(checks: &[CheckId], findings: Vec<PitfallFinding>) -> Self {
        let failures =
            checks.iter().filter(|c| findings.iter().any(|f| f.check == **c && f.severity == Severity::Error)).count();
        TierResult { ran: true, passes: checks.len() - failures, failures, errors: 0, findings, cases: vec![] }
    }

    pub fn from_cases(cases: Vec<CaseOutcome>) -> Self {
        let count = |s| cases.iter().filter(|c| c.status == s).count();
        TierResult {
            ran: true,
            passes: count(CaseStatus::Pass),
            failures: count(CaseStatus::Fail),
            errors: count(CaseStatus::Error),
            findings: vec![],
            cases,
        }
    }

    pub fn error_findings(&self) -> usize {
        error_count(&self.findings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tier {
    Model,
    Data,
    Query,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestReport {
    pub model: TierResult,
    pub data: TierResult,
    pub query: TierResult,
    pub duration_ms: u64,
}

impl TestReport {
    pub fn passes(&self) -> usize {
        self.model.passes + self.data.passes + self.query.passes
    }

    pub fn failures(&self) -> usize {
        self.model.failures + self.data.failures + self.query.failures
    }

    pub fn errors(&self) -> usize {
        self.model.errors + self.data.errors + self.query.errors
    }

    pub fn total(&self) -> usize {
        self.model.total() + self.data.total() + self.query.total()
    }

    /// No Error findings and no failing or erroring query case.
    pub fn is_green(&self) -> bool {
        self.model.error_findings() == 0
            && self.data.error_findings() == 0
            && self.query.failures == 0
            && self.query.errors == 0
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (name, tier) in [("model", &self.model), ("data", &self.data), ("query", &self.query)] {
            if !tier.ran {
                continue;
            }
            out.push_str(&format!(
                "{name:<6} pass {:>3}  fail {:>3}  error {:>3}\n",
                tier.passes, tier.failures, tier.errors
            ));
            for f in &tier.findings {
                out.push_str(&format!("  {:?} {} {}: {}\n", f.severity, f.check, f.subject, f.message));
            }
            for c in &tier.cases {
                out.push_str(&format!(
                    "  {:?} {} [{}] expected {}, got {}\n",
                    c.status, c.case_id, c.cq_id, c.expected, c.actual
                ));
            }
        }
        out.push_str(&format!(
            "total  pass {:>3}  fail {:>3}  error {:>3}\n",
            self.passes(),
            self.failures(),
            self.errors()
        ));
        out
    }
}
