//! Accepted proposal payloads to triples, with deterministic naming.

use std::collections::BTreeMap;

use ontoforge_rdf::vocab::{owl, rdf, rdfs, xsd};
use ontoforge_rdf::{parse_turtle, Graph, Iri, Literal, PrefixMap, Term, Triple};
use serde_json::Value;

use crate::llm::{ProposalDraft, ProposalKind};
use crate::onto::{extract_snapshot, EntityKind, OntologySnapshot};

fn words(name: &str) -> impl Iterator<Item = &str> {
    name.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty())
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// "fuel efficiency" → "FuelEfficiency"; existing inner capitals are kept.
pub fn upper_camel(name: &str) -> String {
    words(name).map(capitalize).collect()
}

/// "Fuel efficiency" → "fuelEfficiency".
pub fn lower_camel(name: &str) -> String {
    let upper = upper_camel(name);
    let mut chars = upper.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => upper,
    }
}

/// Individual names keep the first word as written and capitalize the rest.
pub fn fallback_individual(name: &str) -> String {
    let mut out = String::new();
    for (i, w) in words(name).enumerate() {
        if i == 0 {
            out.push_str(w);
        } else {
            out.push_str(&capitalize(w));
        }
    }
    out
}

/// Datatype shorthand ("integer", "xsd:decimal", full IRI) to an IRI.
pub fn datatype_iri(spec: &str, prefixes: &PrefixMap) -> Result<Iri, String> {
    let spec = spec.trim();
    let full = if spec.contains("://") {
        spec.to_string()
    } else if let Some(expanded) = spec.contains(':').then(|| prefixes.expand_qname(spec)).flatten() {
        expanded
    } else {
        let short = match spec.to_lowercase().as_str() {
            "int" | "integer" | "number" => "integer".to_string(),
            "text" | "string" => "string".to_string(),
            "bool" | "boolean" => "boolean".to_string(),
            "datetime" => "dateTime".to_string(),
            other => other.to_string(),
        };
        format!("{}{short}", xsd::NS)
    };
    Iri::new(full).map_err(|e| e.to_string())
}

fn infer_literal(value: &str) -> Literal {
    let dt = |iri: &'static str| Literal::typed(value, Iri::from_static(iri)).expect("valid lexical form");
    let v = value.trim();
    let digits = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_digit());
    let unsigned = v.strip_prefix(['-', '+']).unwrap_or(v);
    if digits(unsigned) && v == value {
        return dt(xsd::INTEGER);
    }
    if let Some((int, frac)) = unsigned.split_once('.') {
        if (digits(int) || int.is_empty()) && digits(frac) && v == value {
            return dt(xsd::DECIMAL);
        }
    }
    if v == "true" || v == "false" {
        return dt(xsd::BOOLEAN);
    }
    Literal::simple(value)
}

/// Resolves names against the project namespace and the entities known so far.
pub(crate) struct Namer<'a> {
    namespace: &'a str,
    prefixes: &'a PrefixMap,
    snapshot: OntologySnapshot,
    by_local: BTreeMap<String, Vec<Iri>>,
}

impl<'a> Namer<'a> {
    pub fn new(namespace: &'a str, prefixes: &'a PrefixMap, graph: &Graph) -> Result<Self, String> {
        let snapshot = extract_snapshot(graph).map_err(|e| e.to_string())?;
        let mut by_local: BTreeMap<String, Vec<Iri>> = BTreeMap::new();
        let all = snapshot
            .classes
            .iter()
            .chain(&snapshot.object_properties)
            .chain(&snapshot.data_properties)
            .chain(&snapshot.individuals);
        for iri in all {
            by_local.entry(iri.local_name().to_lowercase()).or_default().push(iri.clone());
        }
        Ok(Namer { namespace, prefixes, snapshot, by_local })
    }

    fn explicit(&self, name: &str) -> Result<Option<Iri>, String> {
        let name = name.trim();
        if name.contains("://") {
            return Iri::new(name.trim_start_matches('<').trim_end_matches('>')).map(Some).map_err(|e| e.to_string());
        }
        if let Some((label, _)) = name.split_once(':') {
            if self.prefixes.get(label).is_some() {
                let expanded = self.prefixes.expand_qname(name).expect("bound label");
                return Iri::new(expanded).map(Some).map_err(|e| e.to_string());
            }
        }
        Ok(None)
    }

    fn minted(&self, local: String) -> Result<Iri, String> {
        if local.is_empty() {
            return Err("name has no letters or digits".into());
        }
        Iri::new(format!("{}{local}", self.namespace)).map_err(|e| e.to_string())
    }

    fn local_for(kind: EntityKind, name: &str) -> String {
        match kind {
            EntityKind::Class => upper_camel(name),
            EntityKind::ObjectProperty | EntityKind::DataProperty => lower_camel(name),
            EntityKind::Individual | EntityKind::Unknown => fallback_individual(name),
        }
    }

    /// IRI for a new entity; colliding with any known entity is an error.
    pub fn declare(&self, name: &str, kind: EntityKind) -> Result<Iri, String> {
        let iri = match self.explicit(name)? {
            Some(iri) => iri,
            None => self.minted(Self::local_for(kind, name))?,
        };
        match self.snapshot.classify(&iri) {
            EntityKind::Unknown => Ok(iri),
            existing => Err(format!("{iri} already exists as {existing:?}")),
        }
    }

    /// IRI for a referenced entity: explicit names as given, else a unique
    /// known entity with the same local name, else a minted project IRI.
    pub fn reference(&self, name: &str, kind: EntityKind) -> Result<Iri, String> {
        if let Some(iri) = self.explicit(name)? {
            return Ok(iri);
        }
        let local = Self::local_for(kind, name);
        if let Some(candidates) = self.by_local.get(&local.to_lowercase()) {
            let own: Vec<&Iri> = candidates.iter().filter(|i| i.as_str().starts_with(self.namespace)).collect();
            if let [one] = own.as_slice() {
                return Ok((*one).clone());
            }
            if let ([], [one]) = (own.as_slice(), candidates.as_slice()) {
                return Ok(one.clone());
            }
        }
        self.minted(local)
    }

    pub fn snapshot(&self) -> &OntologySnapshot {
        &self.snapshot
    }
}

fn iri_term(iri: &Iri) -> Term {
    Term::Iri(iri.clone())
}

fn triple(s: &Iri, p: &str, o: Term) -> Triple {
    Triple::new(iri_term(s), Iri::new(p).expect("vocabulary IRI"), o).expect("IRI subject")
}

fn text<'v>(payload: &'v Value, field: &str) -> Option<&'v str> {
    payload.get(field).and_then(Value::as_str).map(str::trim).filter(|s| !s.is_empty())
}

/// Triples for one structural proposal. `language` tags annotation literals
/// that carry no explicit tag. Glossary, CQ and test proposals compile to
/// project records instead and yield no triples here.
pub(crate) fn compile_draft(
    draft: &ProposalDraft,
    namer: &Namer<'_>,
    language: &str,
    graph: &Graph,
) -> Result<Vec<Triple>, String> {
    let p = &draft.payload;
    let required = |f: &str| text(p, f).ok_or_else(|| format!("missing {f}"));
    let mut out = Vec::new();
    match draft.kind {
        ProposalKind::ClassDef => {
            let class = namer.declare(required("name")?, EntityKind::Class)?;
            out.push(triple(&class, rdf::TYPE, Term::Iri(Iri::from_static(owl::CLASS))));
            if let Some(parent) = text(p, "parent") {
                let parent = namer.reference(parent, EntityKind::Class)?;
                out.push(triple(&class, rdfs::SUB_CLASS_OF, iri_term(&parent)));
            }
        }
        ProposalKind::ObjectPropertyDef | ProposalKind::DataPropertyDef => {
            let object = draft.kind == ProposalKind::ObjectPropertyDef;
            let kind = if object { EntityKind::ObjectProperty } else { EntityKind::DataProperty };
            let prop = namer.declare(required("name")?, kind)?;
            let decl = if object { owl::OBJECT_PROPERTY } else { owl::DATATYPE_PROPERTY };
            out.push(triple(&prop, rdf::TYPE, Term::Iri(Iri::from_static(decl))));
            if let Some(domain) = text(p, "domain") {
                out.push(triple(&prop, rdfs::DOMAIN, iri_term(&namer.reference(domain, EntityKind::Class)?)));
            }
            if let Some(range) = text(p, "range") {
                let range = if object {
                    namer.reference(range, EntityKind::Class)?
                } else {
                    datatype_iri(range, namer.prefixes)?
                };
                out.push(triple(&prop, rdfs::RANGE, iri_term(&range)));
            }
            if let Some(parent) = text(p, "parent") {
                out.push(triple(&prop, rdfs::SUB_PROPERTY_OF, iri_term(&namer.reference(parent, kind)?)));
            }
        }
        ProposalKind::RelationAxiom => {
            let relation = required("relation")?;
            let (predicate, subject_kind, object_kind): (String, EntityKind, EntityKind) =
                match relation.trim_start_matches("rdfs:").trim_start_matches("owl:").trim_start_matches("rdf:") {
                    "subClassOf" | "isA" | "is a" => (rdfs::SUB_CLASS_OF.into(), EntityKind::Class, EntityKind::Class),
                    "subPropertyOf" => {
                        (rdfs::SUB_PROPERTY_OF.into(), EntityKind::ObjectProperty, EntityKind::ObjectProperty)
                    }
                    "domain" => (rdfs::DOMAIN.into(), EntityKind::ObjectProperty, EntityKind::Class),
                    "range" => (rdfs::RANGE.into(), EntityKind::ObjectProperty, EntityKind::Class),
                    "type" | "a" => (rdf::TYPE.into(), EntityKind::Individual, EntityKind::Class),
                    "equivalentClass" => (owl::EQUIVALENT_CLASS.into(), EntityKind::Class, EntityKind::Class),
                    "disjointWith" => (owl::DISJOINT_WITH.into(), EntityKind::Class, EntityKind::Class),
                    "inverseOf" => (owl::INVERSE_OF.into(), EntityKind::ObjectProperty, EntityKind::ObjectProperty),
                    _ => {
                        let prop = namer.reference(relation, EntityKind::ObjectProperty)?;
                        if namer.snapshot().classify(&prop) == EntityKind::DataProperty {
                            return Err(format!("{prop} is a data property; relations need an object property"));
                        }
                        (prop.as_str().to_string(), EntityKind::Individual, EntityKind::Individual)
                    }
                };
            let subject = resolve_any(namer, required("subject")?, subject_kind)?;
            let object = resolve_any(namer, required("object")?, object_kind)?;
            out.push(triple(&subject, &predicate, iri_term(&object)));
        }
        ProposalKind::Instance => {
            let ind = namer.declare(required("name")?, EntityKind::Individual)?;
            let class = namer.reference(required("class")?, EntityKind::Class)?;
            out.push(triple(&ind, rdf::TYPE, iri_term(&class)));
            for fact in p.get("facts").and_then(Value::as_array).into_iter().flatten() {
                let prop_name = text(fact, "property").ok_or("fact without property")?;
                let prop = namer.reference(prop_name, EntityKind::ObjectProperty)?;
                let object = match (text(fact, "object"), fact.get("value").and_then(Value::as_str)) {
                    (Some(o), _) => iri_term(&namer.reference(o, EntityKind::Individual)?),
                    (None, Some(v)) => {
                        let lit = match (text(fact, "datatype"), text(fact, "lang")) {
                            (Some(dt), _) => {
                                Literal::typed(v, datatype_iri(dt, namer.prefixes)?).map_err(|e| e.to_string())?
                            }
                            (None, Some(lang)) => Literal::lang(v, lang).map_err(|e| e.to_string())?,
                            (None, None) => infer_literal(v),
                        };
                        Term::Literal(lit)
                    }
                    (None, None) => return Err(format!("fact on {prop_name} has neither object nor value")),
                };
                out.push(triple(&ind, prop.as_str(), object));
            }
        }
        ProposalKind::Annotation => {
            let entity = namer.reference(required("entity")?, EntityKind::Class)?;
            if namer.snapshot().classify(&entity) == EntityKind::Unknown {
                return Err(format!("{entity} is not a known entity"));
            }
            let lang = text(p, "lang").unwrap_or(language);
            let subject = iri_term(&entity);
            for (field, predicate) in [("label", rdfs::LABEL), ("comment", rdfs::COMMENT)] {
                if !graph.objects(&subject, predicate).is_empty() {
                    continue;
                }
                let value = required(field)?;
                let lit = if lang.is_empty() {
                    Literal::simple(value)
                } else {
                    Literal::lang(value, lang).map_err(|e| e.to_string())?
                };
                out.push(triple(&entity, predicate, Term::Literal(lit)));
            }
        }
        ProposalKind::Revision => {
            if let Some(turtle) = text(p, "turtle") {
                let mut head = String::new();
                for (label, ns) in namer.prefixes.iter() {
                    head.push_str(&format!("@prefix {label}: <{ns}> .\n"));
                }
                let (g, _) = parse_turtle(&format!("{head}{turtle}"), None).map_err(|e| format!("turtle: {e}"))?;
                out.extend(g.iter().cloned());
            }
        }
        ProposalKind::GlossaryTerm | ProposalKind::CompetencyQuestion | ProposalKind::SparqlTest => {}
    }
    Ok(out)
}

/// Known entity of any kind first; otherwise mint with the hinted casing.
fn resolve_any(namer: &Namer<'_>, name: &str, hint: EntityKind) -> Result<Iri, String> {
    for kind in [hint, EntityKind::Class, EntityKind::ObjectProperty, EntityKind::Individual] {
        let iri = namer.reference(name, kind)?;
        if namer.snapshot().classify(&iri) != EntityKind::Unknown {
            return Ok(iri);
        }
    }
    namer.reference(name, hint)
}
