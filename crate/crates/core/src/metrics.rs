//! Base and schema metrics, DL expressivity, and the metrics report.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use ontoforge_rdf::vocab::{owl, rdf, rdfs};
use ontoforge_rdf::Graph;
use serde::{Deserialize, Serialize};

use crate::onto::OntologySnapshot;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseMetrics {
    pub class_count: usize,
    pub object_property_count: usize,
    pub data_property_count: usize,
    /// Always `object_property_count + data_property_count`.
    pub properties_count: usize,
    pub individual_count: usize,
    pub sub_class_of_count: usize,
    pub domain_axiom_count: usize,
    pub range_axiom_count: usize,
    pub axiom_total: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemaMetrics {
    pub attribute_richness: f64,
    pub inheritance_richness: f64,
    pub relationship_richness: f64,
    pub axiom_class_ratio: f64,
    pub class_relation_ratio: f64,
    /// Set when any ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

pub fn compute_base_metrics(s: &OntologySnapshot) -> BaseMetrics {
    let count_on_object_props = |map: &std::collections::BTreeMap<_, BTreeSet<_>>| {
        s.object_properties.iter().map(|p| map.get(p).map_or(0, BTreeSet::len)).sum()
    };
    BaseMetrics {
        class_count: s.classes.len(),
        object_property_count: s.object_properties.len(),
        data_property_count: s.data_properties.len(),
        properties_count: s.object_properties.len() + s.data_properties.len(),
        individual_count: s.individuals.len(),
        sub_class_of_count: s.subclass_edges.len(),
        domain_axiom_count: count_on_object_props(&s.domains),
        range_axiom_count: count_on_object_props(&s.ranges),
        axiom_total: s.axiom_total,
    }
}

/// AR = |NA|/|C|, IR = |H|/|C|, RR = |P|/(|H|+|P|), axioms/|C| and |C|/(|H|+|P|).
pub fn compute_schema_metrics(base: &BaseMetrics) -> SchemaMetrics {
    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let c = base.class_count;
    let h = base.sub_class_of_count;
    let p = base.object_property_count;
    let attribute_richness = ratio(base.data_property_count, c);
    let inheritance_richness = ratio(h, c);
    let relationship_richness = ratio(p, h + p);
    let axiom_class_ratio = ratio(base.axiom_total, c);
    let class_relation_ratio = ratio(c, h + p);
    SchemaMetrics {
        attribute_richness,
        inheritance_richness,
        relationship_richness,
        axiom_class_ratio,
        class_relation_ratio,
        degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DlFeature {
    C,
    H,
    I,
    F,
    N,
    O,
    D,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DlExpressivity {
    /// Letters beyond the always-present AL.
    pub features: BTreeSet<DlFeature>,
    /// OWL vocabulary the detector does not map to a letter.
    pub unrecognized: BTreeSet<String>,
}

impl DlExpressivity {
    pub fn render(&self) -> String {
        let mut s = String::from("AL");
        for (f, letter) in [
            (DlFeature::C, 'C'),
            (DlFeature::H, 'H'),
            (DlFeature::I, 'I'),
            (DlFeature::F, 'F'),
            (DlFeature::N, 'N'),
            (DlFeature::O, 'O'),
        ] {
            if self.features.contains(&f) {
                s.push(letter);
            }
        }
        if self.features.contains(&DlFeature::D) {
            s.push_str("(D)");
        }
        s
    }
}

/// OWL terms that stay within AL or carry no logical content.
const AL_VOCABULARY: &[&str] = &[
    owl::CLASS,
    owl::OBJECT_PROPERTY,
    owl::DATATYPE_PROPERTY,
    owl::ANNOTATION_PROPERTY,
    owl::NAMED_INDIVIDUAL,
    owl::ONTOLOGY,
    owl::THING,
    owl::NOTHING,
    owl::VERSION_INFO,
    owl::IMPORTS,
    "http://www.w3.org/2002/07/owl#onProperty",
    "http://www.w3.org/2002/07/owl#allValuesFrom",
    "http://www.w3.org/2002/07/owl#intersectionOf",
];

fn feature_of(owl_term: &str) -> Option<DlFeature> {
    match owl_term {
        owl::INVERSE_OF => Some(DlFeature::I),
        owl::FUNCTIONAL_PROPERTY => Some(DlFeature::F),
        owl::CARDINALITY | owl::MIN_CARDINALITY | owl::MAX_CARDINALITY => Some(DlFeature::N),
        owl::COMPLEMENT_OF | owl::UNION_OF => Some(DlFeature::C),
        owl::ONE_OF => Some(DlFeature::O),
        _ => None,
    }
}

pub fn detect_dl_expressivity(graph: &Graph, snapshot: &OntologySnapshot) -> DlExpressivity {
    let mut out = DlExpressivity::default();
    if !snapshot.data_properties.is_empty() {
        out.features.insert(DlFeature::D);
    }
    for t in graph.iter() {
        let p = t.predicate().as_str();
        if p == rdfs::SUB_PROPERTY_OF {
            out.features.insert(DlFeature::H);
        }
        if t.object().as_literal().is_some_and(|l| l.datatype().is_some()) {
            out.features.insert(DlFeature::D);
        }
        let mut owl_terms = Vec::new();
        if p.starts_with(owl::NS) {
            owl_terms.push(p);
        }
        if p == rdf::TYPE {
            if let Some(o) = t.object().as_iri().filter(|o| o.as_str().starts_with(owl::NS)) {
                owl_terms.push(o.as_str());
            }
        }
        for term in owl_terms {
            match feature_of(term) {
                Some(f) => {
                    out.features.insert(f);
                }
                None if AL_VOCABULARY.contains(&term) => {}
                None => {
                    out.unrecognized.insert(term.to_string());
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub base: BaseMetrics,
    pub schema: SchemaMetrics,
    pub expressivity: String,
    pub unrecognized_constructs: Vec<String>,
}

pub fn metrics_report(graph: &Graph, snapshot: &OntologySnapshot) -> MetricsReport {
    let base = compute_base_metrics(snapshot);
    let dl = detect_dl_expressivity(graph, snapshot);
    MetricsReport {
        base,
        schema: compute_schema_metrics(&base),
        expressivity: dl.render(),
        unrecognized_constructs: dl.unrecognized.into_iter().collect(),
    }
}

impl MetricsReport {
    /// One `label  value` line per metric; reals carry six decimals.
    pub fn render_text(&self) -> String {
        let b = &self.base;
        let s = &self.schema;
        let mut out = String::new();
        let mut line = |label: &str, value: String| writeln!(out, "{label}  {value}").unwrap();
        line("Class count", b.class_count.to_string());
        line("Object property count", b.object_property_count.to_string());
        line("Data property count", b.data_property_count.to_string());
        line("Properties count", b.properties_count.to_string());
        line("Individual count", b.individual_count.to_string());
        line("SubClassOf axioms count", b.sub_class_of_count.to_string());
        line("Object property domain axioms count", b.domain_axiom_count.to_string());
        line("Object property range axioms count", b.range_axiom_count.to_string());
        line("Axiom count", b.axiom_total.to_string());
        line("DL expressivity", self.expressivity.clone());
        line("Attribute richness (AR)", format!("{:.6}", s.attribute_richness));
        line("Inheritance richness (IR)", format!("{:.6}", s.inheritance_richness));
        line("Relationship richness (RR)", format!("{:.6}", s.relationship_richness));
        line("Axiom/class ratio", format!("{:.6}", s.axiom_class_ratio));
        line("Class/relation ratio", format!("{:.6}", s.class_relation_ratio));
        line("Degenerate", s.degenerate.to_string());
        if !self.unrecognized_constructs.is_empty() {
            line("Unrecognized constructs", self.unrecognized_constructs.join(", "));
        }
        out
    }
}
