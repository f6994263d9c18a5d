//! Shared helpers: strict replay of the bundled Henri walkthrough and a
//! random operation generator over project state and pipeline operations.

#![allow(dead_code)]

use std::sync::OnceLock;

use ontoforge_core::fixtures::{henri, read_decisions, run_steps, Step, HENRI_STEPS};
use ontoforge_core::llm::mock::MockProvider;
use ontoforge_core::llm::proposal::Decision;
use ontoforge_core::llm::template::TemplateLibrary;
use ontoforge_core::llm::{Proposal, ProposalDraft, ProposalKind, Provenance, Technique};
use ontoforge_core::pipeline::{
    apply_decisions, merge_modelet, reopen_stage, run_stage, run_tests, Action, Actor, CompetencyQuestion, CqStatus,
    DecisionEntry, Gateway, GlossaryEntry, Modelet, ModeletStatus, PipelineError, Project,
};
use ontoforge_core::stage::Stage;
use ontoforge_core::testkit::Tier;
use ontoforge_rdf::{Iri, Literal, Term, Triple};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

pub fn henri_mock() -> MockProvider {
    MockProvider::load(&henri::mock_dir(), true).expect("bundled mock directory loads")
}

/// Runs `steps` on a fresh Henri project against the strict mock and the
/// bundled decision files.
pub fn replay_henri(steps: &[Step]) -> Result<Project, PipelineError> {
    let mock = henri_mock();
    let templates = TemplateLibrary::builtin();
    let mut project = henri::new_project()?;
    continue_henri(&mut project, steps, &mock, &templates)?;
    Ok(project)
}

pub fn continue_henri(
    project: &mut Project,
    steps: &[Step],
    mock: &MockProvider,
    templates: &TemplateLibrary,
) -> Result<(), PipelineError> {
    let dir = henri::decisions_dir();
    let gateway = Gateway { provider: mock, templates };
    run_steps(project, steps, gateway, henri::FEEDBACK, &mut |name: &str, _: &Project| read_decisions(&dir, name))
}

pub fn full_henri() -> Project {
    replay_henri(HENRI_STEPS).expect("walkthrough replays")
}

/// Steps up to and including the named decision batch.
pub fn steps_through(decision: &str) -> &'static [Step] {
    let end = HENRI_STEPS.iter().position(|s| matches!(s, Step::Decide(d) if *d == decision)).expect("known batch");
    &HENRI_STEPS[..=end]
}

const ALPHABET: &[char] = &['a', 'Z', '7', ' ', '"', '\\', '\n', '\t', 'é', '中', '😀', '<', '>', '#', '{', '}'];

pub fn random_text<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(0..12);
    (0..n).map(|_| *ALPHABET.choose(rng).expect("non-empty")).collect()
}

fn random_iri<R: Rng>(rng: &mut R) -> Iri {
    Iri::new(format!("http://example.org/r#e{}", rng.gen_range(0..40))).expect("valid iri")
}

fn random_literal<R: Rng>(rng: &mut R) -> Literal {
    let text = random_text(rng);
    match rng.gen_range(0..4) {
        0 => Literal::simple(text),
        1 => Literal::lang(text, *["en", "fr", "en-GB"].choose(rng).expect("non-empty")).expect("valid tag"),
        2 => Literal::integer(rng.gen_range(-1000..1000)),
        _ => Literal::typed(text, Iri::new("http://example.org/r#dt").expect("valid")).expect("valid literal"),
    }
}

fn random_triple<R: Rng>(rng: &mut R) -> Triple {
    let subject =
        if rng.gen_bool(0.2) { Term::blank(format!("b{}", rng.gen_range(0..5))) } else { Term::Iri(random_iri(rng)) };
    let object = if rng.gen_bool(0.5) { Term::Literal(random_literal(rng)) } else { Term::Iri(random_iri(rng)) };
    Triple::new(subject, random_iri(rng), object).expect("valid triple")
}

fn random_draft<R: Rng>(rng: &mut R) -> ProposalDraft {
    match rng.gen_range(0..3) {
        0 => ProposalDraft {
            kind: ProposalKind::GlossaryTerm,
            payload: json!({ "term": random_text(rng) + "t", "interpretation": random_text(rng) }),
        },
        1 => ProposalDraft {
            kind: ProposalKind::CompetencyQuestion,
            payload: json!({ "question": random_text(rng) + "?" }),
        },
        _ => ProposalDraft {
            kind: ProposalKind::ClassDef,
            payload: json!({ "name": format!("C{}", rng.gen_range(0..1000)), "definition": random_text(rng) }),
        },
    }
}

/// Applies one random operation to `project`; every operation goes through
/// public fields or public functions.
/// Lenient, so stages run off the recorded path still get (empty) replies.
fn lenient_gateway() -> Gateway<'static> {
    static MOCK: OnceLock<MockProvider> = OnceLock::new();
    static TEMPLATES: OnceLock<TemplateLibrary> = OnceLock::new();
    Gateway {
        provider: MOCK.get_or_init(|| MockProvider::load(&henri::mock_dir(), false).expect("bundled mock loads")),
        templates: TEMPLATES.get_or_init(TemplateLibrary::builtin),
    }
}

/// One random mutation. Pipeline operations may legitimately be refused
/// (stage order, gates, already decided); only the resulting state matters.
pub fn random_op<R: Rng>(project: &mut Project, rng: &mut R) {
    match rng.gen_range(0..16) {
        10 | 11 => {
            // prefer the first stage that is not yet Passed, so runs make progress
            let next = Stage::ALL.into_iter().find(|s| format!("{:?}", project.status(*s)) != "Passed");
            let stage = match next {
                Some(s) if rng.gen_bool(0.8) => s,
                _ => *Stage::ALL.choose(rng).expect("non-empty"),
            };
            let _ = run_stage(project, stage, lenient_gateway());
        }
        12 | 13 => {
            let pending: Vec<String> = project
                .proposals
                .iter()
                .filter(|p| p.status == ontoforge_core::llm::ProposalStatus::Pending)
                .map(|p| p.id.clone())
                .collect();
            let mut batch = Vec::new();
            for id in &pending {
                if rng.gen_bool(0.7) {
                    let accept = rng.gen_bool(0.8);
                    batch.push(if accept { DecisionEntry::accept(id) } else { DecisionEntry::reject(id, "random") });
                }
            }
            let _ = apply_decisions(project, &batch);
        }
        14 => {
            let stage = *Stage::ALL.choose(rng).expect("non-empty");
            let _ = reopen_stage(project, stage);
        }
        15 => {
            if let Some(id) = project.modelets.choose(rng).map(|m| m.id.clone()) {
                let _ = merge_modelet(project, &id);
            }
        }
        0 => {
            let detail = random_text(rng);
            project.record(Actor::Human, Action::Created, "random", &detail, None);
        }
        1 => {
            let role = *["DomainExpert", "EndUser", "OntologyEngineer"].choose(rng).expect("non-empty");
            let source = json!([{ "role": role, "text": random_text(rng) + "x" }]).to_string();
            ontoforge_core::feedback::ingest_feedback(project, &source).expect("valid feedback");
        }
        2 => project.glossary.push(GlossaryEntry {
            term: random_text(rng),
            interpretation: random_text(rng),
            proposal: format!("{:016x}", rng.gen::<u64>()),
        }),
        3 | 4 => {
            let t = random_triple(rng);
            project.model.graph.insert(t);
        }
        5 => {
            let victim = project.model.graph.iter().next().cloned();
            if let Some(t) = victim {
                project.model.graph.remove(&t);
            }
        }
        6 => project.questions.push(CompetencyQuestion {
            id: format!("CQ{:02}", project.questions.len() + 1),
            question: random_text(rng),
            status: *[CqStatus::Untested, CqStatus::Passing, CqStatus::Failing].choose(rng).expect("non-empty"),
            proposal: String::new(),
        }),
        7 => {
            let stage = *Stage::ALL.choose(rng).expect("non-empty");
            let provenance = Provenance {
                template_id: "random".into(),
                technique: Technique::ZeroShot,
                prompt_hash: format!("{:064x}", rng.gen::<u128>()),
                provider: "random".into(),
                timestamp: project.now(),
                vote: None,
            };
            let mut proposal = Proposal::new(random_draft(rng), stage, provenance);
            if rng.gen_bool(0.5) {
                let decision = if rng.gen_bool(0.5) {
                    Decision::Accept
                } else {
                    Decision::Reject { reason: Some(random_text(rng)) }
                };
                proposal.decide(decision).expect("fresh proposal is pending");
            }
            if project.proposal(&proposal.id).is_none() {
                project.proposals.push(proposal);
            }
        }
        8 => {
            let mut graph = ontoforge_rdf::Graph::new();
            for _ in 0..rng.gen_range(0..4) {
                graph.insert(random_triple(rng));
            }
            project.modelets.push(Modelet {
                id: format!("modelet-{}", project.modelets.len() + 1),
                title: random_text(rng),
                status: *[
                    ModeletStatus::Draft,
                    ModeletStatus::UnderTest,
                    ModeletStatus::Merged,
                    ModeletStatus::Reverted,
                ]
                .choose(rng)
                .expect("non-empty"),
                covers: vec![random_text(rng)],
                graph,
                last_report: None,
            });
        }
        _ => {
            let tiers: Vec<Tier> =
                [Tier::Model, Tier::Data, Tier::Query].into_iter().filter(|_| rng.gen_bool(0.6)).collect();
            run_tests(project, &tiers).expect("random graphs have no vocabulary conflicts");
        }
    }
}
