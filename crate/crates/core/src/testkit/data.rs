use std::collections::{BTreeMap, BTreeSet};

use ontoforge_rdf::{Graph, Iri, Term};

use super::{CheckId, PitfallFinding, Severity};
use crate::onto::OntologySnapshot;

/// Superclass closures memoised per class; cycles terminate.
struct Hierarchy<'a> {
    snapshot: &'a OntologySnapshot,
    types: BTreeMap<&'a Iri, Vec<&'a Iri>>,
    closures: BTreeMap<Iri, BTreeSet<Iri>>,
}

impl<'a> Hierarchy<'a> {
    fn new(snapshot: &'a OntologySnapshot) -> Self {
        let mut types: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
        for (i, c) in &snapshot.type_assertions {
            types.entry(i).or_default().push(c);
        }
        Hierarchy { snapshot, types, closures: BTreeMap::new() }
    }

    fn is_a(&mut self, individual: &Iri, class: &Iri) -> bool {
        let Some(direct) = self.types.get(individual).cloned() else { return false };
        for c in direct {
            if !self.closures.contains_key(c) {
                let sup = self.snapshot.subclass_closure(c).unwrap_or_default();
                self.closures.insert(c.clone(), sup);
            }
            if self.closures[c].contains(class) {
                return true;
            }
        }
        false
    }
}

/// ABox conformance against asserted domains and ranges, subclass-transitive.
pub fn run_data_tests(graph: &Graph, snapshot: &OntologySnapshot) -> Vec<PitfallFinding> {
    let mut h = Hierarchy::new(snapshot);
    let mut out = Vec::new();
    let err = |check, subject: &Iri, message: String| PitfallFinding {
        check,
        severity: Severity::Error,
        subject: subject.clone(),
        message,
    };
    for t in graph.iter() {
        let p = t.predicate();
        let is_object = snapshot.object_properties.contains(p);
        let is_data = snapshot.data_properties.contains(p);
        if !is_object && !is_data {
            continue;
        }
        let Some(subject) = t.subject().as_iri() else { continue };
        for d in snapshot.domains.get(p).into_iter().flatten() {
            if !h.is_a(subject, d) {
                out.push(err(CheckId::DomainViolation, subject, format!("{subject} uses {p} but is not a {d}")));
            }
        }
        match t.object() {
            Term::Literal(lit) if is_object => out.push(err(
                CheckId::LiteralOnObjectProperty,
                subject,
                format!("object property {p} has literal value \"{}\"", lit.lexical()),
            )),
            Term::Iri(o) if is_data => {
                out.push(err(CheckId::IriOnDataProperty, subject, format!("data property {p} has IRI value {o}")))
            }
            Term::Iri(o) if is_object => {
                for r in snapshot.ranges.get(p).into_iter().flatten() {
                    if !h.is_a(o, r) {
                        out.push(err(
                            CheckId::RangeViolation,
                            subject,
                            format!("{p} points to {o}, which is not a {r}"),
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onto::extract_snapshot;
    use ontoforge_rdf::parse_turtle;

    const TBOX: &str = "@prefix ex: <http://e/> . @prefix owl: <http://www.w3.org/2002/07/owl#> .\n\
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
        ex:Agent a owl:Class . ex:Person a owl:Class ; rdfs:subClassOf ex:Agent . ex:Car a owl:Class .\n\
        ex:owns a owl:ObjectProperty ; rdfs:domain ex:Agent ; rdfs:range ex:Car .\n\
        ex:age a owl:DatatypeProperty ; rdfs:domain ex:Person .\n";

    fn scan(abox: &str) -> Vec<PitfallFinding> {
        let g = parse_turtle(&format!("{TBOX}{abox}"), None).unwrap().0;
        run_data_tests(&g, &extract_snapshot(&g).unwrap())
    }

    #[test]
    fn conforming_through_subclass() {
        assert!(scan("ex:h a ex:Person ; ex:owns ex:c ; ex:age 40 . ex:c a ex:Car .").is_empty());
    }

    #[test]
    fn each_violation_kind() {
        let f = scan("ex:h ex:age 40 .");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].check, CheckId::DomainViolation);
        assert!(f[0].message.contains("http://e/age") && f[0].message.contains("http://e/Person"));

        let f = scan("ex:h a ex:Person ; ex:owns ex:x .");
        assert_eq!(f.iter().map(|x| x.check).collect::<Vec<_>>(), [CheckId::RangeViolation]);
        let f = scan("ex:h a ex:Person ; ex:owns \"car\" .");
        assert_eq!(f.iter().map(|x| x.check).collect::<Vec<_>>(), [CheckId::LiteralOnObjectProperty]);
        let f = scan("ex:h a ex:Person ; ex:age ex:forty .");
        assert_eq!(f.iter().map(|x| x.check).collect::<Vec<_>>(), [CheckId::IriOnDataProperty]);
    }
}
