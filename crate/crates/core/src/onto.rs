//! Typed TBox/ABox view of a graph.

use std::collections::{BTreeMap, BTreeSet};

use ontoforge_rdf::term::{Iri, Term};
use ontoforge_rdf::vocab::{owl, rdf, rdfs};
use ontoforge_rdf::Graph;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OntoError {
    #[error("conflicting declarations: {}", format_conflicts(.0))]
    ConflictingDeclaration(Vec<Conflict>),
    #[error("unknown class {0}")]
    UnknownClass(Iri),
}

fn format_conflicts(conflicts: &[Conflict]) -> String {
    conflicts
        .iter()
        .map(|c| format!("{} is both {:?} and {:?}", c.iri, c.kinds.0, c.kinds.1))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub iri: Iri,
    pub kinds: (EntityKind, EntityKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    Class,
    ObjectProperty,
    DataProperty,
    Individual,
    Unknown,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: Option<String>,
    pub comment: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologySnapshot {
    pub classes: BTreeSet<Iri>,
    pub object_properties: BTreeSet<Iri>,
    pub data_properties: BTreeSet<Iri>,
    pub individuals: BTreeSet<Iri>,
    /// `(child, parent)`; both endpoints are in `classes`.
    pub subclass_edges: BTreeSet<(Iri, Iri)>,
    pub sub_property_edges: BTreeSet<(Iri, Iri)>,
    /// Keyed by declared properties only.
    pub domains: BTreeMap<Iri, BTreeSet<Iri>>,
    pub ranges: BTreeMap<Iri, BTreeSet<Iri>>,
    pub type_assertions: BTreeSet<(Iri, Iri)>,
    pub annotations: BTreeMap<Iri, Annotation>,
    pub axiom_total: usize,
}

fn is_builtin_class(iri: &str) -> bool {
    iri == owl::THING || iri == owl::NOTHING
}

/// `rdf:type` objects that declare schema entities rather than assert membership.
fn is_schema_type(iri: &str) -> bool {
    (iri.starts_with(owl::NS) && iri != owl::THING && iri != owl::NOTHING)
        || iri == rdfs::CLASS
        || iri == format!("{}Property", rdf::NS)
}

pub fn extract_snapshot(graph: &Graph) -> Result<OntologySnapshot, OntoError> {
    let mut s = OntologySnapshot::default();
    let typed = |class: &str| -> BTreeSet<Iri> {
        graph
            .with_predicate(rdf::TYPE)
            .into_iter()
            .filter(|t| t.object().as_iri().is_some_and(|o| o.as_str() == class))
            .filter_map(|t| t.subject().as_iri().cloned())
            .collect()
    };
    s.classes = typed(owl::CLASS);
    for t in graph.with_predicate(rdfs::SUB_CLASS_OF) {
        for end in [t.subject(), t.object()] {
            if let Some(iri) = end.as_iri() {
                s.classes.insert(iri.clone());
            }
        }
    }
    s.classes.retain(|c| !is_builtin_class(c.as_str()));
    s.object_properties = typed(owl::OBJECT_PROPERTY);
    s.data_properties = typed(owl::DATATYPE_PROPERTY);

    for t in graph.with_predicate(rdf::TYPE) {
        if let (Some(ind), Some(class)) = (t.subject().as_iri(), t.object().as_iri()) {
            if s.classes.contains(class) {
                s.individuals.insert(ind.clone());
                s.type_assertions.insert((ind.clone(), class.clone()));
            }
        }
    }

    let mut conflicts = Vec::new();
    let sets = [
        (EntityKind::Class, &s.classes),
        (EntityKind::ObjectProperty, &s.object_properties),
        (EntityKind::DataProperty, &s.data_properties),
        (EntityKind::Individual, &s.individuals),
    ];
    for (i, (ka, a)) in sets.iter().enumerate() {
        for (kb, b) in &sets[i + 1..] {
            for iri in a.intersection(b) {
                conflicts.push(Conflict { iri: iri.clone(), kinds: (*ka, *kb) });
            }
        }
    }
    if !conflicts.is_empty() {
        conflicts.sort_by(|x, y| x.iri.cmp(&y.iri).then(x.kinds.cmp(&y.kinds)));
        return Err(OntoError::ConflictingDeclaration(conflicts));
    }

    for t in graph.with_predicate(rdfs::SUB_CLASS_OF) {
        if let (Some(c), Some(p)) = (t.subject().as_iri(), t.object().as_iri()) {
            if s.classes.contains(c) && s.classes.contains(p) {
                s.subclass_edges.insert((c.clone(), p.clone()));
            }
        }
    }
    for t in graph.with_predicate(rdfs::SUB_PROPERTY_OF) {
        if let (Some(c), Some(p)) = (t.subject().as_iri(), t.object().as_iri()) {
            s.sub_property_edges.insert((c.clone(), p.clone()));
        }
    }
    let is_property = |iri: &Iri| s.object_properties.contains(iri) || s.data_properties.contains(iri);
    let mut domains: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    let mut ranges: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    for (pred, map) in [(rdfs::DOMAIN, &mut domains), (rdfs::RANGE, &mut ranges)] {
        for t in graph.with_predicate(pred) {
            if let (Some(p), Some(v)) = (t.subject().as_iri(), t.object().as_iri()) {
                if is_property(p) {
                    map.entry(p.clone()).or_default().insert(v.clone());
                }
            }
        }
    }
    s.domains = domains;
    s.ranges = ranges;

    for t in graph.iter() {
        let Some(subject) = t.subject().as_iri() else { continue };
        let Some(lit) = t.object().as_literal() else { continue };
        let is_label = match t.predicate().as_str() {
            rdfs::LABEL => true,
            rdfs::COMMENT => false,
            _ => continue,
        };
        let entry = s.annotations.entry(subject.clone()).or_default();
        let field = if is_label { &mut entry.label } else { &mut entry.comment };
        if field.is_none() {
            *field = Some(lit.lexical().to_string());
        }
    }

    s.axiom_total = count_axioms(graph, &s);
    Ok(s)
}

/// Each triple counts at most once, as the first matching category of:
/// schema declarations, subclass/subproperty/domain/range axioms, class
/// membership assertions, property assertions on individuals, label/comment
/// annotations, other OWL-vocabulary axioms, and triples about blank nodes.
fn count_axioms(graph: &Graph, s: &OntologySnapshot) -> usize {
    let annotation_props: BTreeSet<&str> = graph
        .with_predicate(rdf::TYPE)
        .into_iter()
        .filter(|t| t.object().as_iri().is_some_and(|o| o.as_str() == owl::ANNOTATION_PROPERTY))
        .filter_map(|t| t.subject().as_iri().map(Iri::as_str))
        .collect();
    graph
        .iter()
        .filter(|t| {
            let p = t.predicate().as_str();
            match p {
                rdf::TYPE => t.object().as_iri().is_some_and(|o| {
                    o.as_str() != owl::ONTOLOGY && (is_schema_type(o.as_str()) || s.classes.contains(o))
                }),
                rdfs::SUB_CLASS_OF | rdfs::SUB_PROPERTY_OF | rdfs::DOMAIN | rdfs::RANGE => true,
                rdfs::LABEL | rdfs::COMMENT => true,
                _ if p.starts_with(owl::NS) => true,
                _ if annotation_props.contains(p) => true,
                _ if t.subject().is_blank() => true,
                _ => {
                    let on_individual = t.subject().as_iri().is_some_and(|i| s.individuals.contains(i));
                    on_individual
                        && (s.object_properties.contains(t.predicate()) || s.data_properties.contains(t.predicate()))
                }
            }
        })
        .count()
}

impl OntologySnapshot {
    pub fn classify(&self, iri: &Iri) -> EntityKind {
        if self.classes.contains(iri) {
            EntityKind::Class
        } else if self.object_properties.contains(iri) {
            EntityKind::ObjectProperty
        } else if self.data_properties.contains(iri) {
            EntityKind::DataProperty
        } else if self.individuals.contains(iri) {
            EntityKind::Individual
        } else {
            EntityKind::Unknown
        }
    }

    /// Reflexive-transitive superclasses of `class` over the asserted hierarchy.
    /// Terminates on cycles.
    pub fn subclass_closure(&self, class: &Iri) -> Result<BTreeSet<Iri>, OntoError> {
        if !self.classes.contains(class) {
            return Err(OntoError::UnknownClass(class.clone()));
        }
        let mut seen = BTreeSet::from([class.clone()]);
        let mut stack = vec![class.clone()];
        while let Some(c) = stack.pop() {
            for (_, parent) in self.subclass_edges.iter().filter(|(child, _)| *child == c) {
                if seen.insert(parent.clone()) {
                    stack.push(parent.clone());
                }
            }
        }
        Ok(seen)
    }

    /// Direct subclasses of `class`.
    pub fn children(&self, class: &Iri) -> Vec<&Iri> {
        self.subclass_edges.iter().filter(|(_, p)| p == class).map(|(c, _)| c).collect()
    }

    pub fn parents(&self, class: &Iri) -> Vec<&Iri> {
        self.subclass_edges.iter().filter(|(c, _)| c == class).map(|(_, p)| p).collect()
    }

    pub fn properties(&self) -> impl Iterator<Item = &Iri> {
        self.object_properties.iter().chain(self.data_properties.iter())
    }

    /// Classes and properties: the entities documentation must cover.
    pub fn schema_entities(&self) -> impl Iterator<Item = &Iri> {
        self.classes.iter().chain(self.properties())
    }

    pub fn label(&self, iri: &Iri) -> Option<&str> {
        self.annotations.get(iri).and_then(|a| a.label.as_deref())
    }

    pub fn comment(&self, iri: &Iri) -> Option<&str> {
        self.annotations.get(iri).and_then(|a| a.comment.as_deref())
    }

    /// Individuals typed to `class` or one of its transitive subclasses.
    pub fn instances_of(&self, class: &Iri) -> BTreeSet<&Iri> {
        self.type_assertions
            .iter()
            .filter(|(_, c)| c == class || self.subclass_closure(c).is_ok_and(|sup| sup.contains(class)))
            .map(|(i, _)| i)
            .collect()
    }
}

/// True for terms that name schema vocabulary rather than domain entities.
pub fn is_vocabulary(term: &Term) -> bool {
    term.as_iri().is_some_and(|i| {
        let s = i.as_str();
        s.starts_with(owl::NS) || s.starts_with(rdf::NS) || s.starts_with(rdfs::NS)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ontoforge_rdf::parse_turtle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn snap(doc: &str) -> OntologySnapshot {
        let g = parse_turtle(&format!("{PRE}{doc}"), None).unwrap().0;
        extract_snapshot(&g).unwrap()
    }

    const PRE: &str = "@prefix : <http://e/> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
";

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://e/{s}")).unwrap()
    }

    #[test]
    fn empty_graph() {
        let s = extract_snapshot(&Graph::new()).unwrap();
        assert_eq!(s, OntologySnapshot::default());
        assert_eq!(s.axiom_total, 0);
    }

    #[test]
    fn subclass_endpoints_become_classes() {
        let s = snap(":A a owl:Class . :A rdfs:subClassOf :B .");
        assert_eq!(s.classes.len(), 2);
        assert_eq!(s.subclass_edges.len(), 1);
        assert_eq!(s.axiom_total, 2);
    }

    #[test]
    fn thing_is_not_a_class_and_edges_to_it_are_dropped() {
        let s = snap(":A rdfs:subClassOf owl:Thing .");
        assert_eq!(s.classes.iter().collect::<Vec<_>>(), vec![&iri("A")]);
        assert!(s.subclass_edges.is_empty());
    }

    #[test]
    fn punning_is_reported() {
        let g = parse_turtle(&format!("{PRE}:X a owl:Class . :X a owl:ObjectProperty ."), None).unwrap().0;
        match extract_snapshot(&g) {
            Err(OntoError::ConflictingDeclaration(c)) => {
                assert_eq!(c.len(), 1);
                assert_eq!(c[0].kinds, (EntityKind::Class, EntityKind::ObjectProperty));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_and_individuals() {
        let s = snap(":C a owl:Class . :i a :C . :i a :C2 . :C2 a owl:Class . :p a owl:ObjectProperty .");
        assert_eq!(s.classify(&iri("C")), EntityKind::Class);
        assert_eq!(s.classify(&iri("i")), EntityKind::Individual);
        assert_eq!(s.classify(&iri("p")), EntityKind::ObjectProperty);
        assert_eq!(s.classify(&iri("zzz")), EntityKind::Unknown);
        assert_eq!(s.individuals.len(), 1);
        assert_eq!(s.type_assertions.len(), 2);
    }

    #[test]
    fn domains_only_for_declared_properties() {
        let s = snap(":p a owl:ObjectProperty ; rdfs:domain :A . :q rdfs:domain :A .");
        assert_eq!(s.domains.len(), 1);
        assert!(s.domains.contains_key(&iri("p")));
    }

    #[test]
    fn axiom_categories() {
        let s = snap(
            ":A a owl:Class ; rdfs:label \"A\" ; rdfs:comment \"c\" .
             :p a owl:ObjectProperty ; rdfs:domain :A ; rdfs:range :A ; owl:inverseOf :q .
             :i a :A ; :p :j ; :unrelated :k .
             _:r owl:onProperty :p .
             <http://e/onto> a owl:Ontology .",
        );
        // decl A, label, comment, decl p, domain, range, inverseOf, i a A, i p j, blank onProperty
        assert_eq!(s.axiom_total, 10);
        assert_eq!(s.label(&iri("A")), Some("A"));
    }

    #[test]
    fn fresh_class_declaration_adds_exactly_one() {
        let base = ":A a owl:Class . :i a :A . :A rdfs:subClassOf :B .";
        let a = snap(base);
        let b = snap(&format!("{base} :Fresh a owl:Class ."));
        assert_eq!(b.classes.len(), a.classes.len() + 1);
        assert_eq!(b.axiom_total, a.axiom_total + 1);
    }

    #[test]
    fn closure_of_chain_and_cycle() {
        let s = snap(":A rdfs:subClassOf :B . :B rdfs:subClassOf :C . :X rdfs:subClassOf :Y . :Y rdfs:subClassOf :X .");
        assert_eq!(s.subclass_closure(&iri("A")).unwrap(), [iri("A"), iri("B"), iri("C")].into());
        assert_eq!(s.subclass_closure(&iri("C")).unwrap(), [iri("C")].into());
        assert_eq!(s.subclass_closure(&iri("X")).unwrap().len(), 2);
        assert_eq!(s.subclass_closure(&iri("nope")), Err(OntoError::UnknownClass(iri("nope"))));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn closure_matches_reachability_by_repeated_squaring() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let n = 20;
            let mut doc = String::new();
            let mut reach = vec![vec![false; n]; n];
            for (i, row) in reach.iter_mut().enumerate() {
                doc.push_str(&format!(":c{i} a owl:Class . "));
                row[i] = true;
                for j in (i + 1)..n {
                    if rng.gen_bool(0.12) {
                        doc.push_str(&format!(":c{i} rdfs:subClassOf :c{j} . "));
                        row[j] = true;
                    }
                }
            }
            // boolean matrix squaring until fixpoint
            loop {
                let mut next = reach.clone();
                for i in 0..n {
                    for k in 0..n {
                        if reach[i][k] {
                            for j in 0..n {
                                next[i][j] |= reach[k][j];
                            }
                        }
                    }
                }
                if next == reach {
                    break;
                }
                reach = next;
            }
            let s = snap(&doc);
            for (i, row) in reach.iter().enumerate() {
                let want: BTreeSet<Iri> = (0..n).filter(|&j| row[j]).map(|j| iri(&format!("c{j}"))).collect();
                assert_eq!(s.subclass_closure(&iri(&format!("c{i}"))).unwrap(), want);
            }
        }
    }
}
