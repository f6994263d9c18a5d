//! Regenerates `fixtures/henri/mock` and `fixtures/henri/decisions`.
//!
//! A scripted provider answers every stage of the Henri walkthrough; a
//! recorder captures the replies keyed by prompt hash, and the review choices
//! are written as decision files. The walkthrough is then replayed against
//! the strict mock provider to confirm the fixtures reproduce the same model.
//!
//! Run with `cargo run -p ontoforge-core --example author_fixtures`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ontoforge_core::docgen::fallback_label;
use ontoforge_core::fixtures::{self, henri, read_decisions, run_steps, HENRI_STEPS};
use ontoforge_core::llm::mock::{FnProvider, MockProvider, Recorder};
use ontoforge_core::llm::proposal::render_completion;
use ontoforge_core::llm::template::TemplateLibrary;
use ontoforge_core::llm::{ChatRequest, LlmError, Message, ProposalDraft, ProposalKind, ProposalStatus, Role};
use ontoforge_core::pipeline::{DecisionEntry, Gateway, PipelineError, Project, Verdict};
use ontoforge_core::stage::Stage;
use ontoforge_rdf::vocab::{rdf, rdfs};
use ontoforge_rdf::{parse_turtle, Term};
use serde_json::{json, Value};

fn draft(kind: ProposalKind, payload: Value) -> ProposalDraft {
    ProposalDraft { kind, payload }
}

fn reply(intro: &str, drafts: &[ProposalDraft]) -> String {
    format!("{intro}\n\n{}", render_completion(drafts))
}

fn glossary() -> Vec<ProposalDraft> {
    let terms = [
        ("User Profile", "A contextual view of a user, such as Henri's professional or family profile."),
        (
            "Vehicle Preference",
            "The requirements a profile states for a vehicle: type, budget, brand, fuel type and efficiency.",
        ),
        (
            "Context",
            "The situation a profile applies in: temporal context, location, activity, device or social context.",
        ),
        ("Fuel Efficiency", "Distance travelled per unit of energy."),
    ];
    terms.iter().map(|(t, i)| draft(ProposalKind::GlossaryTerm, json!({ "term": t, "interpretation": i }))).collect()
}

const QUESTIONS: [&str; 15] = [
    "What is demographic information of the user?",
    "What is the user's preferred vehicle type?",
    "What is the user's budget for a vehicle purchase?",
    "Which particular vehicle models are favoured by the user?",
    "What is the user's typical commute distance?",
    "What is the user's preferred vehicle brand?",
    "What are the primary use cases for a particular vehicle model?",
    "What is the user's preferred vehicle transmission type?",
    "What safety features are important to the user?",
    "What is the user's preferred fuel type (gasoline, electric, hybrid, etc.)?",
    "Does the user require cargo/towing capacity for their vehicle?",
    "What infotainment and technology features are desired by the user?",
    "What climate/weather conditions does the user's driving environment have?",
    "How many passengers does the user need to accommodate in their vehicle?",
    "Does the user want new or used/certified pre-owned vehicles?",
];

const ACCEPTED_CQS: [&str; 8] = ["CQ01", "CQ02", "CQ03", "CQ04", "CQ05", "CQ06", "CQ09", "CQ10"];

fn questions() -> Vec<ProposalDraft> {
    QUESTIONS
        .iter()
        .enumerate()
        .map(|(i, q)| {
            draft(ProposalKind::CompetencyQuestion, json!({ "id": format!("CQ{:02}", i + 1), "question": q }))
        })
        .collect()
}

fn class(name: &str, parent: Option<&str>, definition: &str) -> ProposalDraft {
    let mut p = json!({ "name": name, "definition": definition });
    if let Some(parent) = parent {
        p["parent"] = json!(parent);
    }
    draft(ProposalKind::ClassDef, p)
}

fn property(kind: ProposalKind, name: &str, domain: &str, range: &str) -> ProposalDraft {
    draft(kind, json!({ "name": name, "domain": domain, "range": range }))
}

/// Modelet items in dependency order: parents before children, classes
/// before the properties that mention them.
fn modelet_items() -> Vec<ProposalDraft> {
    use ProposalKind::{DataPropertyDef as D, ObjectPropertyDef as O};
    vec![
        class("User", None, "A person whose vehicle needs are being profiled."),
        class("UserProfile", None, "A contextual view of a user."),
        class("Preference", None, "Something a user favours when choosing a vehicle."),
        class("VehiclePreference", Some("Preference"), "A bundle of vehicle requirements stated in one profile."),
        class("VehicleType", Some("Preference"), "A body style or segment."),
        class("Budget", Some("Preference"), "The amount a user is prepared to spend."),
        class("Brand", Some("Preference"), "A vehicle manufacturer brand."),
        class("SafetyFeature", None, "A driver assistance or protection feature."),
        class("Context", None, "A situation in which a profile applies."),
        class("TemporalContext", Some("Context"), "When a profile applies."),
        class("Activity", Some("Context"), "What the user is doing while the profile applies."),
        class("vo:Vehicle", None, "A road vehicle offered for sale."),
        class("vo:VehicleModel", Some("vo:Vehicle"), "A specific model line."),
        class("vo:FuelType", None, "The energy source of a powertrain."),
        property(O, "hasUserProfile", "User", "UserProfile"),
        property(O, "hasVehiclePreference", "UserProfile", "VehiclePreference"),
        property(O, "hasFavoriteBrand", "VehiclePreference", "Brand"),
        property(O, "hasPreferredVehicleType", "VehiclePreference", "VehicleType"),
        property(O, "hasBudget", "VehiclePreference", "Budget"),
        property(O, "hasPreferredFuelType", "VehiclePreference", "vo:FuelType"),
        property(O, "hasImportantSafetyFeature", "VehiclePreference", "SafetyFeature"),
        property(O, "recommendsVehicle", "VehiclePreference", "vo:VehicleModel"),
        property(O, "hasContext", "UserProfile", "Context"),
        property(O, "vo:hasBrand", "vo:VehicleModel", "Brand"),
        property(D, "hasName", "User", "string"),
        property(D, "hasAge", "User", "integer"),
        property(D, "hasDrivingPurpose", "UserProfile", "string"),
        property(D, "hasJobTitle", "UserProfile", "string"),
        property(D, "hasWorkplace", "UserProfile", "string"),
        property(D, "hasNumberOfChildren", "UserProfile", "integer"),
        property(D, "hasCommuteDistance", "UserProfile", "integer"),
        property(D, "hasFuelEfficiency", "VehiclePreference", "integer"),
        property(D, "hasMaxAmount", "Budget", "decimal"),
    ]
}

/// Three samples: the second omits Activity (still 2 of 3), the third adds
/// hasEngineType (1 of 3, so a minority item).
fn modelet_samples(n: usize) -> Vec<String> {
    let base = modelet_items();
    let without_activity: Vec<ProposalDraft> =
        base.iter().filter(|d| d.text("name") != Some("Activity")).cloned().collect();
    let mut with_engine = base.clone();
    with_engine.push(property(ProposalKind::DataPropertyDef, "hasEngineType", "vo:Vehicle", "string"));
    let samples = [
        reply("Here is a modelet covering the selected questions.", &base),
        reply("Proposed modelet.", &without_activity),
        reply("A modelet, with one extra attribute for vehicles.", &with_engine),
    ];
    samples.iter().cycle().take(n).cloned().collect()
}

fn test_for(cq: &str) -> ProposalDraft {
    let (query, expectation, description) = match cq {
        "CQ01" => (
            "SELECT ?user ?name ?age WHERE { ?user ucpo:hasName ?name ; ucpo:hasAge ?age . }".to_string(),
            json!({ "MinRows": 1 }),
            "Users with their name and age.",
        ),
        "CQ02" => (
            "SELECT ?user ?type WHERE {\n  ?user ucpo:hasUserProfile ?profile .\n  ?profile ucpo:hasVehiclePreference ?vp .\n  ?vp ucpo:hasPreferredVehicleType ?type .\n}".into(),
            json!({ "ContainsBinding": { "var": "type", "term": "vo:Compact" } }),
            "Preferred vehicle types per user.",
        ),
        "CQ03" => (
            "SELECT ?user ?amount WHERE {\n  ?user ucpo:hasUserProfile ?profile .\n  ?profile ucpo:hasVehiclePreference ?vp .\n  ?vp ucpo:hasBudget ?budget .\n  ?budget ucpo:hasMaxAmount ?amount .\n}".into(),
            json!({ "MinRows": 1 }),
            "Budgets per user.",
        ),
        "CQ04" => (
            fixtures::QB3.trim().to_string(),
            json!({ "ContainsBinding": { "var": "vehicleModel", "term": "vo:RenaultZoe" } }),
            "Fuel-efficient vehicles suitable for professional users.",
        ),
        "CQ05" => (
            "SELECT ?user ?km WHERE {\n  ?user ucpo:hasUserProfile ?profile .\n  ?profile ucpo:hasCommuteDistance ?km .\n}".into(),
            json!({ "MinRows": 1 }),
            "Commute distance per user.",
        ),
        "CQ06" => (
            fixtures::QB2.trim().to_string(),
            json!({ "MinRows": 1 }),
            "The first 10 users and their favourite brands.",
        ),
        "CQ09" => (
            "SELECT ?user ?feature WHERE {\n  ?user ucpo:hasUserProfile ?profile .\n  ?profile ucpo:hasVehiclePreference ?vp .\n  ?vp ucpo:hasImportantSafetyFeature ?feature .\n}".into(),
            json!({ "ContainsBinding": { "var": "feature", "term": "ucpo:AutomaticEmergencyBraking" } }),
            "Safety features that matter to each user.",
        ),
        "CQ10" => (
            "SELECT ?user ?fuel WHERE {\n  ?user ucpo:hasUserProfile ?profile .\n  ?profile ucpo:hasVehiclePreference ?vp .\n  ?vp ucpo:hasPreferredFuelType ?fuel .\n}".into(),
            json!({ "MinRows": 1 }),
            "Preferred fuel types per user.",
        ),
        other => panic!("no scripted query for {other}"),
    };
    draft(
        ProposalKind::SparqlTest,
        json!({ "cqId": cq, "query": query, "expectation": expectation, "description": description }),
    )
}

/// The first CQ05 reply names a property the vocabulary lacks, so the
/// pipeline's validation triggers one repair round.
fn test_reply(cq: &str, repair: bool) -> String {
    if cq == "CQ05" && !repair {
        let bad = draft(
            ProposalKind::SparqlTest,
            json!({ "cqId": "CQ05", "query": "SELECT ?user ?km WHERE { ?user ucpo:commuteKm ?km . }" }),
        );
        return reply("A query for the commute distance.", &[bad]);
    }
    reply(&format!("SPARQL test for {cq}."), &[test_for(cq)])
}

/// Instance proposals equal to the Henri ABox fixture, one per subject.
fn instances() -> Vec<ProposalDraft> {
    let (graph, prefixes) = parse_turtle(fixtures::HENRI_ABOX, None).expect("fixture parses");
    let name = |t: &Term| prefixes.compact(t.as_iri().expect("iri").as_str()).expect("prefixed");
    let mut by_subject: BTreeMap<String, (String, Vec<Value>)> = BTreeMap::new();
    for t in graph.iter() {
        let entry = by_subject.entry(name(t.subject())).or_default();
        if t.predicate().as_str() == rdf::TYPE {
            entry.0 = name(t.object());
            continue;
        }
        let property = prefixes.compact(t.predicate().as_str()).expect("prefixed");
        let fact = match t.object() {
            Term::Literal(lit) => match (lit.datatype(), lit.language()) {
                (Some(dt), _) => json!({ "property": property, "value": lit.lexical(), "datatype": dt.as_str() }),
                (None, Some(lang)) => json!({ "property": property, "value": lit.lexical(), "lang": lang }),
                (None, None) => json!({ "property": property, "value": lit.lexical() }),
            },
            object => json!({ "property": property, "object": name(object) }),
        };
        entry.1.push(fact);
    }
    by_subject
        .into_iter()
        .map(|(n, (c, facts))| draft(ProposalKind::Instance, json!({ "name": n, "class": c, "facts": facts })))
        .collect()
}

fn refinement() -> Vec<ProposalDraft> {
    let turtle = "ucpo:PersonalProfile a owl:Class ; rdfs:subClassOf ucpo:UserProfile .\n\
                  ucpo:hasPersonalProfile a owl:ObjectProperty ; rdfs:subPropertyOf ucpo:hasUserProfile ;\n    \
                  rdfs:domain ucpo:User ; rdfs:range ucpo:PersonalProfile .\n\
                  ucpo:Location a owl:Class ; rdfs:subClassOf ucpo:Context .\n\
                  ucpo:Device a owl:Class ; rdfs:subClassOf ucpo:Context .\n\
                  ucpo:SocialContext a owl:Class ; rdfs:subClassOf ucpo:Context .\n";
    vec![
        draft(
            ProposalKind::DataPropertyDef,
            json!({ "name": "hasSeatingCapacity", "domain": "vo:Vehicle", "range": "integer",
                    "definition": "Number of seats, needed for family profiles." }),
        ),
        draft(
            ProposalKind::Annotation,
            json!({ "entity": "ucpo:VehiclePreference", "label": "Vehicle Preference",
                    "comment": "A bundle of vehicle requirements stated in one user profile." }),
        ),
        draft(
            ProposalKind::Revision,
            json!({ "summary": "Complete the context module and separate the demographic profile.",
                    "action": "Add PersonalProfile with a hasPersonalProfile sub-property and the remaining context classes.",
                    "turtle": turtle }),
        ),
        class("DrivingStyle", None, "How a user tends to drive."),
    ]
}

/// Labels and comments for annotation requests, taken from the reference
/// ontology where it has them.
fn annotation_for(qname: &str) -> ProposalDraft {
    let (graph, prefixes) = parse_turtle(fixtures::UCPO_MINI, None).expect("fixture parses");
    let iri = prefixes.expand_qname(qname).expect("known prefix");
    let subject = Term::iri(iri.clone()).expect("iri");
    let text =
        |p: &str| graph.objects(&subject, p).first().and_then(|t| t.as_literal()).map(|l| l.lexical().to_string());
    let iri = subject.as_iri().expect("iri").clone();
    let local = iri.local_name().to_string();
    let label = text(rdfs::LABEL).unwrap_or_else(|| fallback_label(&iri));
    let comment = text(rdfs::COMMENT).unwrap_or_else(|| match local.as_str() {
        "hasSeatingCapacity" => "Number of seats in the vehicle.".to_string(),
        _ => format!("The {} of the subject.", fallback_label(&iri).to_lowercase()),
    });
    draft(ProposalKind::Annotation, json!({ "entity": qname, "label": label, "comment": comment }))
}

fn themes() -> Vec<ProposalDraft> {
    let theme = |summary: &str, sentiment: &str, supporting: &[&str], quote: &str, action: &str, rank: i64| {
        draft(
            ProposalKind::Revision,
            json!({ "summary": summary, "sentiment": sentiment, "supporting": supporting,
                    "quote": quote, "action": action, "rank": rank }),
        )
    };
    vec![
        theme(
            "Vehicle safety features are not modelled",
            "Negative",
            &["FB001", "FB002", "FB003"],
            "vehicles need a safety feature property so queries can match them",
            "Add a hasSafetyFeature property from vo:Vehicle to SafetyFeature.",
            1,
        ),
        theme(
            "Trim levels are missing",
            "Negative",
            &["FB005"],
            "customers compare trims",
            "Model trim levels per vehicle model.",
            2,
        ),
        theme(
            "Budget answers are useful",
            "Positive",
            &["FB004"],
            "The budget question works well",
            "Keep the budget module.",
            3,
        ),
    ]
}

fn theme_proposals() -> Vec<ProposalDraft> {
    vec![
        draft(
            ProposalKind::ObjectPropertyDef,
            json!({ "name": "vo:hasSafetyFeature", "domain": "vo:Vehicle", "range": "SafetyFeature",
                    "definition": "A safety feature fitted to the vehicle." }),
        ),
        draft(
            ProposalKind::Annotation,
            json!({ "entity": "vo:hasSafetyFeature", "label": "has safety feature",
                    "comment": "A safety feature fitted to the vehicle, such as automatic emergency braking." }),
        ),
    ]
}

fn script(request: &ChatRequest) -> Result<Vec<String>, LlmError> {
    let tag = request.tag.as_str();
    let (base, repair) = match tag.strip_suffix(" (repair)") {
        Some(b) => (b, true),
        None => (tag, false),
    };
    let one = |s: String| Ok(vec![s]);
    match base.split_once(':').map_or((base, ""), |(a, b)| (a, b)) {
        ("scenario-glossary", _) => one(reply("Key terms from the scenario documents.", &glossary())),
        ("competency-questions", _) => one(reply("Candidate competency questions.", &questions())),
        ("modelet", _) => Ok(modelet_samples(request.n)),
        ("test-query", cq) => one(test_reply(cq, repair)),
        ("test-instances", _) => one(reply("Instance data for Henri's two profiles.", &instances())),
        ("refinement", _) => one(reply("Suggested refinements.", &refinement())),
        ("annotation", qname) => one(reply(&format!("Annotation for {qname}."), &[annotation_for(qname)])),
        ("feedback-summary", _) => one(reply("Themes found in the feedback.", &themes())),
        ("feedback-proposals#1", _) => {
            let theme =
                request.messages.iter().rev().find(|m| m.role == Role::User).map(|m: &Message| m.content.clone());
            one(format!(
                "Vehicles carry no safety information today. Add an object property hasSafetyFeature with domain \
                 vo:Vehicle and range SafetyFeature, and label it. Theme considered:\n{}",
                theme.unwrap_or_default().lines().find(|l| l.starts_with("- ")).unwrap_or("")
            ))
        }
        ("feedback-proposals#2", _) => one(reply("Concrete proposals.", &theme_proposals())),
        _ => Err(LlmError::Provider { status: 404, body: format!("no script for {tag}") }),
    }
}

fn pending(project: &Project, stage: Stage) -> Vec<&ontoforge_core::llm::Proposal> {
    project.proposals.iter().filter(|p| p.stage == stage && p.status == ProposalStatus::Pending).collect()
}

fn accept(id: &str) -> DecisionEntry {
    DecisionEntry::accept(id)
}

fn choose(name: &str, project: &Project) -> Vec<DecisionEntry> {
    match name {
        "01-glossary" => pending(project, Stage::ScenarioGlossary)
            .into_iter()
            .map(|p| match p.text("term") {
                Some("Fuel Efficiency") => DecisionEntry::reject(&p.id, "covered by Vehicle Preference"),
                _ => accept(&p.id),
            })
            .collect(),
        "02-questions" => pending(project, Stage::CompetencyQuestions)
            .into_iter()
            .map(|p| {
                let id = p.text("id").unwrap_or_default();
                if id == "CQ05" {
                    DecisionEntry {
                        proposal: p.id.clone(),
                        verdict: Verdict::Edit,
                        payload: Some(json!({ "id": "CQ05", "question": "What is the user's typical commute distance in kilometres?" })),
                        reason: Some("state the unit".into()),
                    }
                } else if ACCEPTED_CQS.contains(&id) {
                    accept(&p.id)
                } else {
                    DecisionEntry::reject(&p.id, "deferred to a later iteration")
                }
            })
            .collect(),
        "03-modelet" => {
            let order: Vec<String> = modelet_items().iter().map(|d| d.vote_key()).collect();
            let mut items = pending(project, Stage::ModeletDevelopment);
            let key = |p: &ontoforge_core::llm::Proposal| {
                let k = p.effective_draft().vote_key();
                order.iter().position(|o| *o == k).unwrap_or(usize::MAX)
            };
            items.sort_by_key(|p| key(p));
            items
                .into_iter()
                .map(|p| match p.provenance.vote.as_ref() {
                    Some(v) if !v.majority => DecisionEntry::reject(&p.id, "minority proposal; engine type is out of scope"),
                    _ => accept(&p.id),
                })
                .collect()
        }
        "04-tests" => pending(project, Stage::TestCaseGeneration).into_iter().map(|p| accept(&p.id)).collect(),
        "05-refinement" => pending(project, Stage::ModelRefinement)
            .into_iter()
            .map(|p| match p.text("name") {
                Some("DrivingStyle") => DecisionEntry::reject(&p.id, "no competency question needs it yet"),
                _ => accept(&p.id),
            })
            .collect(),
        "06-docs" => pending(project, Stage::DocumentGeneration).into_iter().map(|p| accept(&p.id)).collect(),
        "07-themes" => pending(project, Stage::Feedback)
            .into_iter()
            .map(|p| match p.text("summary") {
                Some(s) if s.contains("safety") => accept(&p.id),
                _ => DecisionEntry::reject(&p.id, "not actionable in this iteration"),
            })
            .collect(),
        "08-theme-proposals" => pending(project, Stage::Feedback).into_iter().map(|p| accept(&p.id)).collect(),
        other => panic!("unknown decision batch {other}"),
    }
}

fn clear(dir: &Path, ext: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|x| x == ext) {
            fs::remove_file(path)?;
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mock_dir = henri::mock_dir();
    let decisions_dir = henri::decisions_dir();
    clear(&mock_dir, "txt")?;
    clear(&mock_dir, "json")?;
    clear(&decisions_dir, "json")?;

    let templates = TemplateLibrary::builtin();
    let recorder = Recorder::new(FnProvider(script));
    let mut authored = henri::new_project()?;
    let gateway = Gateway { provider: &recorder, templates: &templates };
    run_steps(&mut authored, HENRI_STEPS, gateway, henri::FEEDBACK, &mut |name, project| {
        let entries = choose(name, project);
        let text = serde_json::to_string_pretty(&entries).map_err(|e| PipelineError::Io(e.to_string()))?;
        fs::write(decisions_dir.join(format!("{name}.json")), text + "\n")?;
        Ok(entries)
    })?;
    let recorded = recorder.write(&mock_dir)?;

    let mock = MockProvider::load(&mock_dir, true)?;
    let mut replayed = henri::new_project()?;
    let gateway = Gateway { provider: &mock, templates: &templates };
    run_steps(&mut replayed, HENRI_STEPS, gateway, henri::FEEDBACK, &mut |name, _| {
        read_decisions(&decisions_dir, name)
    })?;
    assert_eq!(authored.model, replayed.model, "mock replay diverged from the scripted run");

    let report = replayed.last_report.as_ref().expect("walkthrough ends with a test run");
    println!("recorded {recorded} prompts into {}", mock_dir.display());
    println!("main model: {} triples", replayed.model.graph.len());
    print!("{}", report.render_text());
    if !report.is_green() {
        return Err("the walkthrough does not end green".into());
    }
    Ok(())
}
