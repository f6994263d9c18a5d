use std::collections::{BTreeMap, BTreeSet};

use ontoforge_rdf::vocab::{owl, rdf, rdfs};
use ontoforge_rdf::{Graph, Iri};

use super::{CheckId, PitfallFinding, Severity};
use crate::onto::{is_vocabulary, OntologySnapshot};

fn finding(check: CheckId, severity: Severity, subject: &Iri, message: String) -> PitfallFinding {
    PitfallFinding { check, severity, subject: subject.clone(), message }
}

/// Structural scan. Findings come back sorted by check then subject.
pub fn run_model_tests(graph: &Graph, snapshot: &OntologySnapshot) -> Vec<PitfallFinding> {
    let mut out = Vec::new();
    for p in snapshot.properties() {
        if !snapshot.domains.contains_key(p) {
            out.push(finding(CheckId::MissingDomain, Severity::Warning, p, format!("property {p} has no rdfs:domain")));
        }
        if !snapshot.ranges.contains_key(p) {
            out.push(finding(CheckId::MissingRange, Severity::Warning, p, format!("property {p} has no rdfs:range")));
        }
    }
    out.extend(subclass_cycles(snapshot));
    out.extend(untyped_individuals(graph, snapshot));
    out.extend(orphan_properties(graph, snapshot));
    for e in snapshot.schema_entities() {
        if snapshot.label(e).is_none() {
            out.push(finding(CheckId::MissingLabel, Severity::Warning, e, format!("{e} has no rdfs:label")));
        }
    }
    out.sort();
    out
}

/// One finding per strongly connected component of the asserted hierarchy
/// that contains a cycle, reported at its smallest IRI.
fn subclass_cycles(s: &OntologySnapshot) -> Vec<PitfallFinding> {
    let mut succ: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
    for (c, p) in &s.subclass_edges {
        succ.entry(c).or_default().push(p);
    }
    let reach = |start: &Iri| -> BTreeSet<Iri> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            for next in succ.get(n).into_iter().flatten() {
                if seen.insert((*next).clone()) {
                    stack.push(next);
                }
            }
        }
        seen
    };
    let reachable: BTreeMap<&Iri, BTreeSet<Iri>> = succ.keys().map(|c| (*c, reach(c))).collect();
    let mut reported: BTreeSet<Iri> = BTreeSet::new();
    let mut out = Vec::new();
    for (c, from_c) in &reachable {
        if reported.contains(*c) || !from_c.contains(*c) {
            continue;
        }
        let component: BTreeSet<Iri> =
            from_c.iter().filter(|d| reachable.get(d).is_some_and(|r| r.contains(*c))).cloned().collect();
        let names: Vec<&str> = component.iter().map(Iri::as_str).collect();
        let first = component.first().expect("cycle contains its start");
        out.push(finding(
            CheckId::SubclassCycle,
            Severity::Error,
            first,
            format!("subclass cycle through {{{}}}", names.join(", ")),
        ));
        reported.extend(component);
    }
    out
}

fn is_declaration_type(iri: &str) -> bool {
    (iri.starts_with(owl::NS) && iri != owl::NAMED_INDIVIDUAL && iri != owl::THING)
        || iri == rdfs::CLASS
        || iri == format!("{}Property", rdf::NS)
}

fn untyped_individuals(graph: &Graph, s: &OntologySnapshot) -> Vec<PitfallFinding> {
    let declared: BTreeSet<&Iri> = graph
        .with_predicate(rdf::TYPE)
        .into_iter()
        .filter(|t| t.object().as_iri().is_some_and(|o| is_declaration_type(o.as_str())))
        .filter_map(|t| t.subject().as_iri())
        .collect();
    let subjects: BTreeSet<&Iri> =
        graph.iter().filter(|t| !is_vocabulary(t.subject())).filter_map(|t| t.subject().as_iri()).collect();
    subjects
        .into_iter()
        .filter(|i| !declared.contains(i))
        .filter(|i| !s.individuals.contains(*i) && !s.classes.contains(*i))
        .filter(|i| !s.object_properties.contains(*i) && !s.data_properties.contains(*i))
        .map(|i| {
            finding(CheckId::UntypedIndividual, Severity::Warning, i, format!("{i} is described but has no class"))
        })
        .collect()
}

/// A property is orphaned when nothing uses it: no assertions, no domain or
/// range, and no place in the property hierarchy.
fn orphan_properties(graph: &Graph, s: &OntologySnapshot) -> Vec<PitfallFinding> {
    let in_hierarchy: BTreeSet<&Iri> = s.sub_property_edges.iter().flat_map(|(a, b)| [a, b]).collect();
    s.properties()
        .filter(|p| !s.domains.contains_key(*p) && !s.ranges.contains_key(*p) && !in_hierarchy.contains(p))
        .filter(|p| graph.with_predicate(p.as_str()).is_empty())
        .map(|p| {
            finding(CheckId::OrphanProperty, Severity::Warning, p, format!("property {p} is declared but never used"))
        })
        .collect()
}
