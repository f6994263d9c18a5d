use std::collections::{BTreeMap, BTreeSet};

use ontoforge_core::docgen::{annotation_targets, build_docs, emit_markdown_docs};
use ontoforge_core::feedback::ingest_feedback;
use ontoforge_core::fixtures::henri;
use ontoforge_core::llm::retrieval::{CorpusIndex, Document};
use ontoforge_core::onto::extract_snapshot;
use ontoforge_rdf::{parse_turtle, Iri, PrefixMap};
use proptest::prelude::*;
use serde_json::json;

const WORDS: [&str; 8] = ["battery", "range", "family", "commute", "safety", "budget", "suv", "hybrid"];

fn doc_strategy() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0..WORDS.len(), 0..12), 1..7)
}

/// Straight from the definition: score(d) = Σ_t tf·ln(1 + N/df), summed over
/// distinct query words present in d.
fn oracle_scores(docs: &[Vec<usize>], query: &[usize]) -> Vec<f64> {
    let n = docs.len() as f64;
    let distinct: BTreeSet<usize> = query.iter().copied().collect();
    docs.iter()
        .map(|d| {
            distinct
                .iter()
                .map(|&w| {
                    let tf = d.iter().filter(|&&x| x == w).count();
                    let df = docs.iter().filter(|other| other.contains(&w)).count();
                    if tf == 0 {
                        0.0
                    } else {
                        tf as f64 * (1.0 + n / df as f64).ln()
                    }
                })
                .sum()
        })
        .collect()
}

fn text_of(words: &[usize]) -> String {
    words.iter().map(|&w| WORDS[w].to_uppercase()).collect::<Vec<_>>().join(", ")
}

proptest! {
    #[test]
    fn retrieval_matches_the_scoring_definition(docs in doc_strategy(), query in prop::collection::vec(0..WORDS.len(), 0..5), k in 0usize..8) {
        let index = CorpusIndex::build(
            docs.iter().enumerate().map(|(i, d)| Document { id: format!("d{i}"), title: String::new(), text: text_of(d) }).collect(),
        );
        let query_text = query.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ");
        let expected = oracle_scores(&docs, &query);
        let got = index.retrieve(&query_text, k);
        prop_assert!(got.len() <= k);
        for window in got.windows(2) {
            prop_assert!(window[0].1 >= window[1].1);
        }
        for (id, score) in &got {
            let i: usize = id[1..].parse().unwrap();
            prop_assert!(*score > 0.0);
            prop_assert!((score - expected[i]).abs() < 1e-9, "{} vs {}", score, expected[i]);
        }
        let positive = expected.iter().filter(|s| **s > 0.0).count();
        prop_assert_eq!(got.len(), positive.min(k));
        // nothing omitted scores strictly above anything returned
        if let Some(last) = got.last() {
            let returned: BTreeSet<&str> = got.iter().map(|(id, _)| id.as_str()).collect();
            for (i, s) in expected.iter().enumerate() {
                if !returned.contains(format!("d{i}").as_str()) {
                    prop_assert!(*s <= last.1 + 1e-12);
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Onto {
    /// Parent index is always lower, so the hierarchy is acyclic.
    classes: Vec<(Option<usize>, bool, bool)>,
    properties: Vec<(bool, usize, bool, bool)>,
}

fn onto_strategy() -> impl Strategy<Value = Onto> {
    (1usize..8)
        .prop_flat_map(|n| {
            let classes = (0..n)
                .map(|i| {
                    let parent = if i == 0 { Just(None).boxed() } else { prop::option::of(0..i).boxed() };
                    (parent, any::<bool>(), any::<bool>())
                })
                .collect::<Vec<_>>();
            let properties = prop::collection::vec((any::<bool>(), 0..n, any::<bool>(), any::<bool>()), 0..6);
            (classes, properties)
        })
        .prop_map(|(classes, properties)| Onto { classes, properties })
}

fn render(o: &Onto) -> String {
    let mut ttl = String::from(
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
         @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n@prefix ex: <http://example.org/g#> .\n",
    );
    for (i, (parent, label, comment)) in o.classes.iter().enumerate() {
        ttl += &format!("ex:ThingNumber{i} a owl:Class .\n");
        if let Some(p) = parent {
            ttl += &format!("ex:ThingNumber{i} rdfs:subClassOf ex:ThingNumber{p} .\n");
        }
        if *label {
            ttl += &format!("ex:ThingNumber{i} rdfs:label \"Class label {i}\"@en .\n");
        }
        if *comment {
            ttl += &format!("ex:ThingNumber{i} rdfs:comment \"About class {i}.\"@en .\n");
        }
    }
    for (j, (object, domain, label, comment)) in o.properties.iter().enumerate() {
        let (kind, range) =
            if *object { ("owl:ObjectProperty", "ex:ThingNumber0") } else { ("owl:DatatypeProperty", "xsd:string") };
        ttl += &format!("ex:relatesTo{j} a {kind} ; rdfs:domain ex:ThingNumber{domain} ; rdfs:range {range} .\n");
        if *label {
            ttl += &format!("ex:relatesTo{j} rdfs:label \"Property label {j}\"@en .\n");
        }
        if *comment {
            ttl += &format!("ex:relatesTo{j} rdfs:comment \"About property {j}.\"@en .\n");
        }
    }
    ttl
}

proptest! {
    #[test]
    fn documentation_covers_every_class_and_property(o in onto_strategy()) {
        let (graph, _) = parse_turtle(&render(&o), None).unwrap();
        let snapshot = extract_snapshot(&graph).unwrap();
        let bundle = build_docs("Random", &snapshot, &[]);
        let classes: BTreeSet<&Iri> = bundle.classes.iter().map(|c| &c.iri).collect();
        prop_assert_eq!(classes, snapshot.classes.iter().collect::<BTreeSet<_>>());
        let properties: BTreeSet<&Iri> = bundle.properties.iter().map(|p| &p.iri).collect();
        let declared: BTreeSet<&Iri> = snapshot.object_properties.iter().chain(&snapshot.data_properties).collect();
        prop_assert_eq!(properties, declared);

        let markdown = bundle.to_markdown();
        prop_assert_eq!(&markdown, &emit_markdown_docs("Random", &snapshot, &[]));
        for c in &bundle.classes {
            prop_assert!(markdown.contains(c.iri.as_str()));
            prop_assert!(bundle.hierarchy.iter().any(|line| line.contains(&c.label)), "{} missing from the outline", c.label);
            prop_assert!(!c.label.is_empty());
        }
        for (i, (_, labelled, _)) in o.classes.iter().enumerate() {
            let section = bundle.classes.iter().find(|c| c.iri.as_str().ends_with(&format!("ThingNumber{i}"))).unwrap();
            if *labelled {
                prop_assert_eq!(section.label.clone(), format!("Class label {i}"));
            }
        }
    }

    #[test]
    fn annotation_targets_are_exactly_the_incomplete_entities(o in onto_strategy()) {
        let (graph, _) = parse_turtle(&render(&o), None).unwrap();
        let snapshot = extract_snapshot(&graph).unwrap();
        let mut prefixes = PrefixMap::standard();
        prefixes.insert("ex".to_string(), "http://example.org/g#".to_string());
        let targets: BTreeSet<String> = annotation_targets(&snapshot, &prefixes).into_iter().map(|t| t.name).collect();
        let mut expected = BTreeSet::new();
        for (i, (_, label, comment)) in o.classes.iter().enumerate() {
            if !(label & comment) {
                expected.insert(format!("ex:ThingNumber{i}"));
            }
        }
        for (j, (_, _, label, comment)) in o.properties.iter().enumerate() {
            if !(label & comment) {
                expected.insert(format!("ex:relatesTo{j}"));
            }
        }
        prop_assert_eq!(targets, expected);
    }

    #[test]
    fn feedback_ingest_is_idempotent(items in prop::collection::vec((0usize..3, "[a-z ]{1,12}"), 0..10)) {
        let roles = ["DomainExpert", "EndUser", "OntologyEngineer"];
        let source = serde_json::to_string(
            &items.iter().map(|(r, t)| json!({ "role": roles[*r], "text": format!("{t}.") })).collect::<Vec<_>>(),
        ).unwrap();
        let mut project = henri::new_project().unwrap();
        let first = ingest_feedback(&mut project, &source).unwrap();
        let distinct: BTreeMap<(usize, String), ()> =
            items.iter().map(|(r, t)| ((*r, format!("{t}.").trim().to_string()), ())).collect();
        prop_assert_eq!(first.added, distinct.len());
        prop_assert_eq!(first.added + first.duplicates, items.len());
        let after = project.feedback.clone();
        let second = ingest_feedback(&mut project, &source).unwrap();
        prop_assert_eq!(second.added, 0);
        prop_assert_eq!(second.duplicates, items.len());
        prop_assert_eq!(&project.feedback, &after);
        for (i, item) in project.feedback.iter().enumerate() {
            prop_assert_eq!(&item.id, &format!("FB{:03}", i + 1));
        }
    }
}

#[test]
fn malformed_feedback_reports_a_position() {
    let mut project = henri::new_project().unwrap();
    let err = ingest_feedback(&mut project, "[{\"role\": \"EndUser\",\n \"text\": }]").unwrap_err();
    assert!(matches!(err, ontoforge_core::pipeline::PipelineError::ParseError { line: 2, .. }), "{err:?}");
    let unknown_role = ingest_feedback(&mut project, r#"[{"role": "Manager", "text": "hi"}]"#);
    assert!(unknown_role.is_err());
    let bad_time = ingest_feedback(&mut project, r#"[{"role": "EndUser", "text": "hi", "timestamp": "yesterday"}]"#);
    assert!(bad_time.is_err());
    assert!(project.feedback.is_empty());
}

#[test]
fn bundled_feedback_ingests_five_items() {
    let mut project = henri::new_project().unwrap();
    let summary = ingest_feedback(&mut project, henri::FEEDBACK).unwrap();
    assert_eq!((summary.added, summary.duplicates), (5, 0));
}
