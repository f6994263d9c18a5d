//! Merging modelets into the main model, and reverting them.

use std::time::Instant;

use ontoforge_rdf::Triple;

use super::decisions::refresh_gates;
use super::{Action, Actor, ModeletStatus, PipelineError, Project, MAIN_TARGET};
use crate::onto::extract_snapshot;
use crate::testkit::{run_model_tests, run_query_tests, CaseStatus, CheckId, TestReport, TierResult};

/// Merge gate: zero model-test Errors on main ∪ modelet, and every query
/// test of a covered CQ passes there. On failure the report is attached to
/// the modelet, the attempt is logged, and the modelet stays UnderTest.
pub fn merge_modelet(project: &mut Project, id: &str) -> Result<TestReport, PipelineError> {
    let idx = project
        .modelets
        .iter()
        .position(|m| m.id == id && m.status == ModeletStatus::UnderTest)
        .ok_or_else(|| PipelineError::UnknownModelet(format!("{id} (no modelet with that id is UnderTest)")))?;
    let started = Instant::now();
    let modelet = &project.modelets[idx];
    let union = project.model.graph.merge(&modelet.graph);
    let snapshot = extract_snapshot(&union).map_err(|e| PipelineError::Precondition(e.to_string()))?;
    let model = TierResult::from_findings(&CheckId::MODEL, run_model_tests(&union, &snapshot));
    let suite: Vec<_> = project.tests.iter().filter(|t| modelet.covers.contains(&t.cq_id)).cloned().collect();
    let query = run_query_tests(&union, &suite, &project.model.prefixes);
    let report = TestReport { model, data: TierResult::default(), query, duration_ms: project.elapsed_ms(started) };
    let mut failing: Vec<String> =
        report.query.cases.iter().filter(|c| c.status != CaseStatus::Pass).map(|c| c.cq_id.clone()).collect();
    failing.sort();
    failing.dedup();
    let passed = report.model.error_findings() == 0 && failing.is_empty();
    project.modelets[idx].last_report = Some(report.clone());
    if !passed {
        let detail = format!("{} model errors; failing {}", report.model.error_findings(), failing.join(", "));
        project.record(Actor::System, Action::GateFailed, id, &detail, None);
        return Err(PipelineError::GateFailed { modelet: id.to_string(), failing, report: Box::new(report) });
    }
    let triples: Vec<Triple> = project.modelets[idx].graph.iter().cloned().collect();
    project.add_triples(MAIN_TARGET, triples, Actor::System, &format!("merge {id}"))?;
    project.modelets[idx].status = ModeletStatus::Merged;
    project.record(Actor::Human, Action::ModeletMerged, id, &format!("{} passing cases", report.query.passes), None);
    refresh_gates(project)?;
    Ok(report)
}

/// Marks a modelet Reverted. A merged modelet's triples are removed from main,
/// except those another merged modelet also contributed.
pub fn revert_modelet(project: &mut Project, id: &str) -> Result<usize, PipelineError> {
    let idx = project
        .modelets
        .iter()
        .position(|m| m.id == id && m.status != ModeletStatus::Reverted)
        .ok_or_else(|| PipelineError::UnknownModelet(id.to_string()))?;
    let mut removed = 0;
    if project.modelets[idx].status == ModeletStatus::Merged {
        let keep = |t: &Triple| {
            project.modelets.iter().any(|m| m.id != id && m.status == ModeletStatus::Merged && m.graph.contains(t))
        };
        let triples: Vec<Triple> = project.modelets[idx].graph.iter().filter(|t| !keep(t)).cloned().collect();
        removed = project.remove_triples(MAIN_TARGET, &triples, Actor::Human, &format!("revert {id}"))?;
    }
    project.modelets[idx].status = ModeletStatus::Reverted;
    project.record(Actor::Human, Action::ModeletStatus, id, "Reverted", None);
    Ok(removed)
}
