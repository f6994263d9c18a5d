//! Review decisions and stage gates.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::compile::{compile_draft, Namer};
use super::{
    Action, Actor, CompetencyQuestion, CqStatus, GlossaryEntry, PipelineError, Project, StageStatus, MAIN_TARGET,
};
use crate::llm::proposal::{Decision, DecisionError};
use crate::llm::ProposalKind;
use crate::stage::Stage;
use crate::testkit::{prepare_query, run_data_tests, run_model_tests, run_query_tests, Expectation, TestCase};
use ontoforge_rdf::parse_query;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
    Edit,
}

/// One line of a decision file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionEntry {
    pub proposal: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl DecisionEntry {
    pub fn accept(id: &str) -> Self {
        DecisionEntry { proposal: id.into(), verdict: Verdict::Accept, payload: None, reason: None }
    }

    pub fn reject(id: &str, reason: &str) -> Self {
        DecisionEntry { proposal: id.into(), verdict: Verdict::Reject, payload: None, reason: Some(reason.into()) }
    }

    fn decision(&self) -> Result<Decision, PipelineError> {
        Ok(match self.verdict {
            Verdict::Accept => Decision::Accept,
            Verdict::Reject => Decision::Reject { reason: self.reason.clone() },
            Verdict::Edit => Decision::Edit {
                payload: self.payload.clone().ok_or_else(|| {
                    PipelineError::Precondition(format!("edit of {} carries no payload", self.proposal))
                })?,
            },
        })
    }
}

/// Applies every decision or none: on error the project is left untouched.
pub fn apply_decisions(project: &mut Project, entries: &[DecisionEntry]) -> Result<(), PipelineError> {
    let mut work = project.clone();
    for entry in entries {
        apply_one(&mut work, entry)?;
    }
    refresh_gates(&mut work)?;
    *project = work;
    Ok(())
}

fn apply_one(project: &mut Project, entry: &DecisionEntry) -> Result<(), PipelineError> {
    let idx = project
        .proposals
        .iter()
        .position(|p| p.id == entry.proposal)
        .ok_or_else(|| PipelineError::UnknownProposal(entry.proposal.clone()))?;
    let decision = entry.decision()?;
    project.proposals[idx].decide(decision).map_err(|e| match e {
        DecisionError::AlreadyDecided(id) => PipelineError::AlreadyDecided(id),
        DecisionError::InvalidEdit(e) => {
            PipelineError::CompileError { proposal: entry.proposal.clone(), reason: e.to_string() }
        }
    })?;
    let proposal = project.proposals[idx].clone();
    let detail = match &proposal.reason {
        Some(r) => format!("{:?}: {r}", proposal.status),
        None => format!("{:?}", proposal.status),
    };
    project.record(Actor::Human, Action::Decided, &proposal.id, &detail, None);
    if !proposal.is_accepted() {
        return Ok(());
    }
    let fail = |reason: String| PipelineError::CompileError { proposal: proposal.id.clone(), reason };
    let draft = proposal.effective_draft();
    match draft.kind {
        ProposalKind::GlossaryTerm => {
            let term = draft.text("term").unwrap_or_default().trim().to_string();
            if project.glossary.iter().any(|g| g.term.eq_ignore_ascii_case(&term)) {
                return Err(fail(format!("glossary already defines {term}")));
            }
            project.glossary.push(GlossaryEntry {
                term,
                interpretation: draft.text("interpretation").unwrap_or_default().trim().to_string(),
                proposal: proposal.id.clone(),
            });
        }
        ProposalKind::CompetencyQuestion => {
            let id = match draft.text("id").map(str::trim) {
                Some(id) if !id.is_empty() && !project.questions.iter().any(|q| q.id == id) => id.to_string(),
                _ => next_cq_id(project),
            };
            project.questions.push(CompetencyQuestion {
                id,
                question: draft.text("question").unwrap_or_default().trim().to_string(),
                status: CqStatus::Untested,
                proposal: proposal.id.clone(),
            });
        }
        ProposalKind::SparqlTest => {
            let cq = draft.text("cqId").unwrap_or_default().trim().to_string();
            if !project.questions.iter().any(|q| q.id == cq) {
                return Err(fail(format!("no competency question {cq}")));
            }
            let query = draft.text("query").unwrap_or_default().to_string();
            parse_query(&prepare_query(&query, &project.model.prefixes)).map_err(|e| fail(format!("query: {e}")))?;
            let expectation: Expectation = match draft.payload.get("expectation") {
                Some(v) if !v.is_null() => serde_json::from_value(v.clone()).map_err(|e| fail(e.to_string()))?,
                _ => Expectation::default(),
            };
            let id = next_test_id(project);
            project.tests.push(TestCase {
                id: id.clone(),
                cq_id: cq.clone(),
                query,
                expectation,
                description: draft.text("description").unwrap_or_default().to_string(),
            });
            project.record(Actor::System, Action::TestRegistered, &id, &format!("{cq} from {}", proposal.id), None);
        }
        _ => {
            let target = compile_target(project, proposal.stage);
            let graph = project.working_graph();
            let namer = Namer::new(&project.config.namespace, &project.model.prefixes, &graph).map_err(&fail)?;
            let triples = compile_draft(&draft, &namer, &project.config.language, &graph).map_err(&fail)?;
            let why = format!("{} {}", draft.kind, proposal.id);
            project.add_triples(&target, triples, Actor::Human, &why)?;
        }
    }
    Ok(())
}

/// Modelet-building stages write to the newest open modelet; all others to main.
fn compile_target(project: &Project, stage: Stage) -> String {
    match stage {
        Stage::ModeletDevelopment | Stage::TestCaseGeneration => {
            project.open_modelet().map(|m| m.id.clone()).unwrap_or_else(|| MAIN_TARGET.to_string())
        }
        _ => MAIN_TARGET.to_string(),
    }
}

fn next_cq_id(project: &Project) -> String {
    (1..).map(|n| format!("CQ{n:02}")).find(|id| !project.questions.iter().any(|q| &q.id == id)).expect("unbounded")
}

fn next_test_id(project: &Project) -> String {
    (1..).map(|n| format!("TC{n:02}")).find(|id| !project.tests.iter().any(|t| &t.id == id)).expect("unbounded")
}

/// The stage's exit predicate, ignoring pending proposals.
pub fn gate_holds(project: &Project, stage: Stage) -> Result<bool, PipelineError> {
    Ok(match stage {
        Stage::ScenarioGlossary => !project.glossary.is_empty(),
        Stage::CompetencyQuestions => !project.questions.is_empty(),
        Stage::ModeletDevelopment => {
            project.modelets.iter().any(|m| m.status != super::ModeletStatus::Reverted && !m.graph.is_empty())
        }
        Stage::TestCaseGeneration => {
            !project.questions.is_empty()
                && project.questions.iter().all(|q| project.tests.iter().any(|t| t.cq_id == q.id))
        }
        Stage::ModelRefinement => {
            let snapshot = project.snapshot()?;
            let graph = &project.model.graph;
            let errors = crate::testkit::error_count(&run_model_tests(graph, &snapshot))
                + crate::testkit::error_count(&run_data_tests(graph, &snapshot));
            let query = run_query_tests(graph, &project.tests, &project.model.prefixes);
            errors == 0 && query.failures == 0 && query.errors == 0 && !project.modelets.iter().any(|m| m.is_open())
        }
        Stage::DocumentGeneration => {
            let snapshot = project.snapshot()?;
            let annotated =
                snapshot.schema_entities().all(|e| snapshot.label(e).is_some() && snapshot.comment(e).is_some());
            annotated
        }
        Stage::Feedback => true,
    })
}

/// Settles stages that were run and have nothing left to review.
pub(crate) fn refresh_gates(project: &mut Project) -> Result<(), PipelineError> {
    for stage in Stage::ALL {
        let status = project.status(stage);
        if !matches!(status, StageStatus::AwaitingReview | StageStatus::Failed)
            || project.pending(stage).next().is_some()
        {
            continue;
        }
        let next = if gate_holds(project, stage)? { StageStatus::Passed } else { StageStatus::Failed };
        project.set_status(stage, next, "gate evaluated");
    }
    Ok(())
}
