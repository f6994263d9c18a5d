//! Running stages through the gateway, reopening them, and running tests.

use std::time::Instant;

use ontoforge_rdf::{parse_query, Graph, Iri, PrefixMap};
use serde_json::json;

use super::decisions::refresh_gates;
use super::{Action, Actor, CqStatus, Modelet, ModeletStatus, PipelineError, Project, StageStatus};
use crate::llm::proposal::{Decision, VoteInfo};
use crate::llm::retrieval::CorpusIndex;
use crate::llm::template::{ids, Excerpt, TemplateLibrary};
use crate::llm::vote::self_consistency;
use crate::llm::{
    request_proposals, request_proposals_checked, ChatRequest, LlmError, PromptTemplate, Proposal, ProposalDraft,
    ProposalKind, ProposalStatus, Provenance, Provider, RenderContext, StructuredReply,
};
use crate::metrics::metrics_report;
use crate::onto::{extract_snapshot, OntologySnapshot};
use crate::stage::Stage;
use crate::testkit::{
    prepare_query, run_data_tests, run_model_tests, run_query_tests, unknown_iris, CaseStatus, CheckId, TestReport,
    Tier, TierResult,
};

/// Provider plus prompt templates.
#[derive(Clone, Copy)]
pub struct Gateway<'a> {
    pub provider: &'a dyn Provider,
    pub templates: &'a TemplateLibrary,
}

impl Gateway<'_> {
    pub(crate) fn template(&self, id: &str) -> Result<&PromptTemplate, PipelineError> {
        Ok(self.templates.get(id)?)
    }
}

pub(crate) fn provenance(
    project: &Project,
    template: &PromptTemplate,
    request: &ChatRequest,
    provider: &str,
) -> Provenance {
    Provenance {
        template_id: template.id.clone(),
        technique: template.technique,
        prompt_hash: request.prompt_hash(),
        provider: provider.to_string(),
        timestamp: project.now(),
        vote: None,
    }
}

/// Stores new proposals as Pending; ids already in the store are skipped.
pub(crate) fn add_proposals(project: &mut Project, proposals: Vec<Proposal>) -> Vec<String> {
    let mut added = Vec::new();
    for p in proposals {
        if project.proposal(&p.id).is_some() {
            continue;
        }
        let detail = match (&p.status, &p.reason) {
            (ProposalStatus::Pending, _) => format!("{} pending", p.kind),
            (status, reason) => format!("{} {status:?}: {}", p.kind, reason.as_deref().unwrap_or("")),
        };
        project.record(Actor::Llm, Action::ProposalAdded, &p.id, &detail, None);
        added.push(p.id.clone());
        project.proposals.push(p);
    }
    added
}

pub(crate) fn structured(reply: StructuredReply) -> Result<(ChatRequest, Vec<ProposalDraft>), LlmError> {
    reply.outcome.map(|drafts| (reply.request, drafts))
}

/// Runs `stage`: all earlier stages must be Passed, and the stage itself
/// NotStarted or Failed. On a gateway error nothing but the error log entry
/// is kept. Returns the ids of the new proposals.
pub fn run_stage(project: &mut Project, stage: Stage, gateway: Gateway<'_>) -> Result<Vec<String>, PipelineError> {
    for prior in &Stage::ALL[..stage.index()] {
        let status = project.status(*prior);
        if status != StageStatus::Passed {
            return Err(PipelineError::StageOrderViolation { stage, reason: format!("{prior} is {status:?}") });
        }
    }
    match project.status(stage) {
        StageStatus::NotStarted | StageStatus::Failed => {}
        StageStatus::AwaitingReview => {
            return Err(PipelineError::StageOrderViolation { stage, reason: "it is awaiting review".into() })
        }
        StageStatus::Passed => {
            return Err(PipelineError::StageOrderViolation {
                stage,
                reason: "it already Passed; reopen it first".into(),
            })
        }
    }
    let mut work = project.clone();
    let result = match stage {
        Stage::ScenarioGlossary => glossary(&mut work, gateway),
        Stage::CompetencyQuestions => questions(&mut work, gateway),
        Stage::ModeletDevelopment => modelet(&mut work, gateway),
        Stage::TestCaseGeneration => tests(&mut work, gateway),
        Stage::ModelRefinement => refinement(&mut work, gateway),
        Stage::DocumentGeneration => documentation(&mut work, gateway),
        Stage::Feedback => crate::feedback::summarize_feedback(&mut work, gateway),
    };
    match result {
        Ok(ids) => {
            work.record(Actor::System, Action::StageRun, stage.name(), &format!("{} new proposals", ids.len()), None);
            work.set_status(stage, StageStatus::AwaitingReview, "run complete");
            refresh_gates(&mut work)?;
            *project = work;
            Ok(ids)
        }
        Err(e) => {
            project.record(Actor::System, Action::ProviderError, stage.name(), &e.to_string(), None);
            Err(e)
        }
    }
}

fn single(
    project: &mut Project,
    gateway: Gateway<'_>,
    template_id: &str,
    ctx: &RenderContext,
    stage: Stage,
    tag: &str,
) -> Result<Vec<String>, PipelineError> {
    let template = gateway.template(template_id)?;
    let reply = request_proposals(
        gateway.provider,
        template.messages(ctx)?,
        &template.expected_kinds,
        &project.config.generation,
        tag,
    )?;
    let (request, drafts) = structured(reply)?;
    let prov = provenance(project, template, &request, &gateway.provider.id());
    let proposals = drafts.into_iter().map(|d| Proposal::new(d, stage, prov.clone())).collect();
    Ok(add_proposals(project, proposals))
}

fn scenario_text(project: &Project) -> String {
    project.scenarios.iter().map(|d| format!("{}\n{}", d.title, d.text.trim())).collect::<Vec<_>>().join("\n\n")
}

fn glossary_text(project: &Project) -> String {
    project.glossary.iter().map(|g| format!("- {}: {}", g.term, g.interpretation)).collect::<Vec<_>>().join("\n")
}

fn questions_text<'a>(project: &'a Project, only: impl Fn(&str) -> bool + 'a) -> String {
    project
        .questions
        .iter()
        .filter(|q| only(&q.id))
        .map(|q| format!("{}: {}", q.id, q.question))
        .collect::<Vec<_>>()
        .join("\n")
}

fn glossary(project: &mut Project, gateway: Gateway<'_>) -> Result<Vec<String>, PipelineError> {
    let index = CorpusIndex::build(project.scenarios.clone());
    let query = format!(
        "{} {}",
        project.config.domain,
        project.scenarios.iter().map(|d| d.title.as_str()).collect::<Vec<_>>().join(" ")
    );
    let mut ctx =
        RenderContext::new().slot("domain", project.config.domain.clone()).slot("scenario", scenario_text(project));
    ctx.retrieved = index
        .retrieve(&query, project.config.retrieval_k.max(1))
        .into_iter()
        .filter_map(|(id, _)| {
            index.document(&id).map(|d| Excerpt { source: id.clone(), text: d.text.trim().to_string() })
        })
        .collect();
    single(project, gateway, ids::GLOSSARY, &ctx, Stage::ScenarioGlossary, ids::GLOSSARY)
}

fn questions(project: &mut Project, gateway: Gateway<'_>) -> Result<Vec<String>, PipelineError> {
    let ctx = RenderContext::new()
        .slot("domain", project.config.domain.clone())
        .slot("scenario", scenario_text(project))
        .slot("glossary", glossary_text(project));
    single(project, gateway, ids::COMPETENCY_QUESTIONS, &ctx, Stage::CompetencyQuestions, ids::COMPETENCY_QUESTIONS)
}

fn modelet(project: &mut Project, gateway: Gateway<'_>) -> Result<Vec<String>, PipelineError> {
    let covered: Vec<String> = project
        .modelets
        .iter()
        .filter(|m| m.status != ModeletStatus::Reverted)
        .flat_map(|m| m.covers.iter().cloned())
        .collect();
    let id = match project.modelets.iter().rev().find(|m| m.status == ModeletStatus::Draft) {
        Some(m) => m.id.clone(),
        None => {
            let id = format!("modelet-{}", project.modelets.len() + 1);
            let covers: Vec<String> =
                project.questions.iter().map(|q| q.id.clone()).filter(|q| !covered.contains(q)).collect();
            let title = format!(
                "Modelet for {}",
                if covers.is_empty() { "refinements".to_string() } else { covers.join(", ") }
            );
            project.modelets.push(Modelet {
                id: id.clone(),
                title,
                status: ModeletStatus::Draft,
                covers,
                graph: Graph::new(),
                last_report: None,
            });
            project.record(Actor::System, Action::ModeletCreated, &id, "Draft", None);
            id
        }
    };
    let covers = project.modelet(&id).expect("just ensured").covers.clone();
    let ctx = RenderContext::new()
        .slot("questions", questions_text(project, move |q| covers.is_empty() || covers.iter().any(|c| c == q)))
        .slot("glossary", glossary_text(project))
        .slot("ontology", project.model.to_turtle());
    let template = gateway.template(ids::MODELET)?;
    let k = project.config.self_consistency_k.max(1);
    let outcome = self_consistency(gateway.provider, template, &ctx, k, &project.config.generation)?;
    if outcome.failures.len() >= k {
        return Err(PipelineError::Llm(outcome.failures[0].1.clone()));
    }
    let prov = provenance(project, template, &outcome.request, &gateway.provider.id());
    let mut proposals = Vec::new();
    for (items, majority) in [(&outcome.tally.winners, true), (&outcome.tally.minority, false)] {
        for item in items {
            let mut p = prov.clone();
            p.vote = Some(VoteInfo { count: item.count, samples: outcome.tally.samples, majority });
            proposals.push(Proposal::new(item.draft.clone(), Stage::ModeletDevelopment, p));
        }
    }
    Ok(add_proposals(project, proposals))
}

/// Class, property and individual inventory as prefixed names.
pub fn inventory(snapshot: &OntologySnapshot, prefixes: &PrefixMap) -> String {
    let name = |i: &Iri| prefixes.compact(i.as_str()).unwrap_or_else(|| format!("<{}>", i.as_str()));
    let set = |items: &std::collections::BTreeSet<Iri>| items.iter().map(name).collect::<Vec<_>>().join(", ");
    let sig = |p: &Iri| {
        let ends = |m: &std::collections::BTreeMap<Iri, std::collections::BTreeSet<Iri>>| {
            m.get(p).map(|s| s.iter().map(name).collect::<Vec<_>>().join("|")).unwrap_or_else(|| "?".into())
        };
        format!("{} ({} -> {})", name(p), ends(&snapshot.domains), ends(&snapshot.ranges))
    };
    let props = |items: &std::collections::BTreeSet<Iri>| items.iter().map(sig).collect::<Vec<_>>().join(", ");
    format!(
        "Classes: {}\nObject properties: {}\nData properties: {}\nIndividuals: {}",
        set(&snapshot.classes),
        props(&snapshot.object_properties),
        props(&snapshot.data_properties),
        set(&snapshot.individuals)
    )
}

fn tests(project: &mut Project, gateway: Gateway<'_>) -> Result<Vec<String>, PipelineError> {
    if project.questions.is_empty() {
        return Err(PipelineError::Precondition("no accepted competency questions".into()));
    }
    let graph = project.working_graph();
    let snapshot = extract_snapshot(&graph).map_err(|e| PipelineError::Precondition(e.to_string()))?;
    let vocabulary = inventory(&snapshot, &project.model.prefixes);
    let template = gateway.template(ids::TEST_QUERY)?.clone();
    let provider_id = gateway.provider.id();
    let mut added = Vec::new();
    let todo: Vec<(String, String)> = project
        .questions
        .iter()
        .filter(|q| !project.tests.iter().any(|t| t.cq_id == q.id))
        .filter(|q| {
            !project.proposals.iter().any(|p| {
                p.kind == ProposalKind::SparqlTest
                    && p.status == ProposalStatus::Pending
                    && p.text("cqId") == Some(q.id.as_str())
            })
        })
        .map(|q| (q.id.clone(), q.question.clone()))
        .collect();
    for (cq, question) in todo {
        let ctx = RenderContext::new()
            .slot("cq_id", cq.clone())
            .slot("question", question)
            .slot("vocabulary", vocabulary.clone());
        let prefixes = project.model.prefixes.clone();
        let check = |drafts: &[ProposalDraft]| -> Result<(), String> {
            for d in drafts {
                let text = d.text("query").unwrap_or_default();
                let q =
                    parse_query(&prepare_query(text, &prefixes)).map_err(|e| format!("query does not parse: {e}"))?;
                let unknown = unknown_iris(&q, &snapshot);
                if !unknown.is_empty() {
                    let names: Vec<&str> = unknown.iter().map(Iri::as_str).collect();
                    return Err(format!("query uses IRIs outside the vocabulary: {}", names.join(", ")));
                }
            }
            Ok(())
        };
        let tag = format!("{}:{cq}", template.id);
        let reply = request_proposals_checked(
            gateway.provider,
            template.messages(&ctx)?,
            &template.expected_kinds,
            &project.config.generation,
            &tag,
            &check,
        )?;
        let prov = provenance(project, &template, &reply.request, &provider_id);
        let proposals = match reply.outcome {
            Ok(drafts) => {
                drafts.into_iter().map(|d| Proposal::new(d, Stage::TestCaseGeneration, prov.clone())).collect()
            }
            Err(e) if e.is_parse_failure() => {
                let raw = reply.response.completions.first().map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
                let draft = ProposalDraft {
                    kind: ProposalKind::SparqlTest,
                    payload: json!({ "cqId": cq, "query": raw.unwrap_or_else(|| "(empty completion)".into()) }),
                };
                let mut p = Proposal::new(draft, Stage::TestCaseGeneration, prov);
                p.decide(Decision::Reject { reason: Some(format!("unparseable: {e}")) })
                    .expect("fresh proposal is pending");
                vec![p]
            }
            Err(e) => return Err(e.into()),
        };
        added.extend(add_proposals(project, proposals));
    }
    let all_cqs = questions_text(project, |_| true);
    let ctx = RenderContext::new().slot("questions", all_cqs).slot("vocabulary", vocabulary);
    added.extend(single(project, gateway, ids::TEST_INSTANCES, &ctx, Stage::TestCaseGeneration, ids::TEST_INSTANCES)?);
    let drafts: Vec<String> =
        project.modelets.iter().filter(|m| m.status == ModeletStatus::Draft).map(|m| m.id.clone()).collect();
    for id in drafts {
        project.modelets.iter_mut().find(|m| m.id == id).expect("listed").status = ModeletStatus::UnderTest;
        project.record(Actor::System, Action::ModeletStatus, &id, "UnderTest", None);
    }
    Ok(added)
}

fn refinement(project: &mut Project, gateway: Gateway<'_>) -> Result<Vec<String>, PipelineError> {
    let snapshot = project.snapshot()?;
    let metrics = metrics_report(&project.model.graph, &snapshot);
    let report = evaluate(project, &[Tier::Model, Tier::Data, Tier::Query])?;
    let mut ctx = RenderContext::new().slot("ontology", project.model.to_turtle());
    ctx.facts = Some(format!("Quality metrics:\n{}\nTest results:\n{}", metrics.render_text(), report.render_text()));
    single(project, gateway, ids::REFINEMENT, &ctx, Stage::ModelRefinement, ids::REFINEMENT)
}

fn documentation(project: &mut Project, gateway: Gateway<'_>) -> Result<Vec<String>, PipelineError> {
    if project.model.graph.is_empty() {
        return Err(PipelineError::Precondition("the main model is empty".into()));
    }
    let snapshot = project.snapshot()?;
    let template = gateway.template(ids::ANNOTATION)?.clone();
    let mut added = Vec::new();
    for target in crate::docgen::annotation_targets(&snapshot, &project.model.prefixes) {
        let ctx = RenderContext::new()
            .slot("entity", target.name.clone())
            .slot("entity_kind", target.kind_label)
            .slot("context", target.context);
        let tag = format!("{}:{}", template.id, target.name);
        let reply = request_proposals(
            gateway.provider,
            template.messages(&ctx)?,
            &template.expected_kinds,
            &project.config.generation,
            &tag,
        )?;
        let prov = provenance(project, &template, &reply.request, &gateway.provider.id());
        match reply.outcome {
            Ok(drafts) => {
                let proposals =
                    drafts.into_iter().map(|d| Proposal::new(d, Stage::DocumentGeneration, prov.clone())).collect();
                added.extend(add_proposals(project, proposals));
            }
            Err(e) => project.record(Actor::System, Action::ProviderError, &target.name, &e.to_string(), None),
        }
    }
    Ok(added)
}

/// Runs the requested tiers on the main model without touching the project.
pub fn evaluate(project: &Project, tiers: &[Tier]) -> Result<TestReport, PipelineError> {
    let started = Instant::now();
    let graph = &project.model.graph;
    let snapshot = project.snapshot()?;
    let mut report = TestReport::default();
    if tiers.contains(&Tier::Model) {
        report.model = TierResult::from_findings(&CheckId::MODEL, run_model_tests(graph, &snapshot));
    }
    if tiers.contains(&Tier::Data) {
        report.data = TierResult::from_findings(&CheckId::DATA, run_data_tests(graph, &snapshot));
    }
    if tiers.contains(&Tier::Query) {
        report.query = run_query_tests(graph, &project.tests, &project.model.prefixes);
    }
    report.duration_ms = project.elapsed_ms(started);
    Ok(report)
}

/// Runs tiers on the main model, records the report, and updates CQ statuses
/// when the query tier ran.
pub fn run_tests(project: &mut Project, tiers: &[Tier]) -> Result<TestReport, PipelineError> {
    let report = evaluate(project, tiers)?;
    if report.query.ran {
        for q in &mut project.questions {
            let cases: Vec<_> = report.query.cases.iter().filter(|c| c.cq_id == q.id).collect();
            q.status = if cases.is_empty() {
                CqStatus::Untested
            } else if cases.iter().all(|c| c.status == CaseStatus::Pass) {
                CqStatus::Passing
            } else {
                CqStatus::Failing
            };
        }
    }
    let detail = format!("pass {} fail {} error {}", report.passes(), report.failures(), report.errors());
    project.record(Actor::System, Action::TestsRun, "tests", &detail, None);
    project.last_report = Some(report.clone());
    Ok(report)
}

/// Explicit backward transition: `stage` and every later stage return to
/// NotStarted, their pending proposals are rejected, and UnderTest modelets
/// go back to Draft when a modelet-building stage is reopened.
pub fn reopen_stage(project: &mut Project, stage: Stage) -> Result<(), PipelineError> {
    if project.status(stage) == StageStatus::NotStarted {
        return Err(PipelineError::Precondition(format!("{stage} has not been run")));
    }
    project.record(Actor::Human, Action::StageReopened, stage.name(), "downstream stages reset", None);
    for later in Stage::ALL.into_iter().filter(|s| *s >= stage) {
        let pending: Vec<usize> = (0..project.proposals.len())
            .filter(|&i| project.proposals[i].stage == later && project.proposals[i].status == ProposalStatus::Pending)
            .collect();
        for i in pending {
            project.proposals[i].decide(Decision::Reject { reason: Some("stage reopened".into()) }).expect("pending");
            let id = project.proposals[i].id.clone();
            project.record(Actor::System, Action::Decided, &id, "Rejected: stage reopened", None);
        }
        project.set_status(later, StageStatus::NotStarted, "reopened");
    }
    if stage <= Stage::TestCaseGeneration {
        let under: Vec<String> =
            project.modelets.iter().filter(|m| m.status == ModeletStatus::UnderTest).map(|m| m.id.clone()).collect();
        for id in under {
            project.modelets.iter_mut().find(|m| m.id == id).expect("listed").status = ModeletStatus::Draft;
            project.record(Actor::System, Action::ModeletStatus, &id, "Draft", None);
        }
    }
    Ok(())
}
