//! Annotation targets and Markdown documentation of the ontology.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use ontoforge_rdf::{Iri, PrefixMap};

use crate::onto::{EntityKind, OntologySnapshot};
use crate::pipeline::GlossaryEntry;

/// Local name split at CamelCase boundaries and underscores.
pub fn fallback_label(iri: &Iri) -> String {
    let chars: Vec<char> = iri.local_name().chars().collect();
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '-' || c.is_whitespace() {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            continue;
        }
        let boundary = c.is_uppercase()
            && i > 0
            && !current.is_empty()
            && (chars[i - 1].is_lowercase()
                || chars[i - 1].is_ascii_digit()
                || chars.get(i + 1).is_some_and(|n| n.is_lowercase()) && chars[i - 1].is_uppercase());
        if boundary {
            words.push(std::mem::take(&mut current));
        }
        current.push(c);
    }
    if !current.is_empty() {
        words.push(current);
    }
    words.join(" ")
}

fn display_name(snapshot: &OntologySnapshot, iri: &Iri) -> String {
    snapshot.label(iri).map(str::to_string).unwrap_or_else(|| fallback_label(iri))
}

fn short(prefixes: &PrefixMap, iri: &Iri) -> String {
    prefixes.compact(iri.as_str()).unwrap_or_else(|| format!("<{}>", iri.as_str()))
}

/// An entity that lacks a label or a comment, with prompt context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationTarget {
    pub iri: Iri,
    /// Prefixed name when one exists.
    pub name: String,
    pub kind_label: &'static str,
    pub context: String,
}

/// Classes, then properties, missing a label or a comment; each group in IRI order.
pub fn annotation_targets(snapshot: &OntologySnapshot, prefixes: &PrefixMap) -> Vec<AnnotationTarget> {
    let mut out = Vec::new();
    for iri in snapshot.schema_entities() {
        if snapshot.label(iri).is_some() && snapshot.comment(iri).is_some() {
            continue;
        }
        let kind = snapshot.classify(iri);
        let kind_label = match kind {
            EntityKind::Class => "class",
            EntityKind::ObjectProperty => "object property",
            EntityKind::DataProperty => "data property",
            _ => continue,
        };
        let names = |set: Option<&BTreeSet<Iri>>| {
            set.map(|s| s.iter().map(|i| short(prefixes, i)).collect::<Vec<_>>().join(", ")).unwrap_or_default()
        };
        let mut context = String::new();
        if kind == EntityKind::Class {
            let parents: Vec<String> = snapshot.parents(iri).into_iter().map(|p| short(prefixes, p)).collect();
            let children: Vec<String> = snapshot.children(iri).into_iter().map(|c| short(prefixes, c)).collect();
            writeln!(context, "Superclasses: {}", parents.join(", ")).unwrap();
            writeln!(context, "Subclasses: {}", children.join(", ")).unwrap();
        } else {
            writeln!(context, "Domain: {}", names(snapshot.domains.get(iri))).unwrap();
            writeln!(context, "Range: {}", names(snapshot.ranges.get(iri))).unwrap();
        }
        if let Some(label) = snapshot.label(iri) {
            writeln!(context, "Existing label: {label}").unwrap();
        }
        if let Some(comment) = snapshot.comment(iri) {
            writeln!(context, "Existing comment: {comment}").unwrap();
        }
        out.push(AnnotationTarget {
            iri: iri.clone(),
            name: short(prefixes, iri),
            kind_label,
            context: context.trim_end().to_string(),
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSection {
    pub iri: Iri,
    pub label: String,
    pub comment: Option<String>,
    pub superclasses: Vec<String>,
    pub subclasses: Vec<String>,
    /// Properties whose domain is this class.
    pub properties: Vec<String>,
    pub individuals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertySection {
    pub iri: Iri,
    pub label: String,
    pub kind: EntityKind,
    pub comment: Option<String>,
    pub domain: Vec<String>,
    pub range: Vec<String>,
}

/// One section per class and per property, each list sorted by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocBundle {
    pub title: String,
    pub classes: Vec<ClassSection>,
    pub properties: Vec<PropertySection>,
    /// Indented outline lines of the subclass hierarchy.
    pub hierarchy: Vec<String>,
    pub glossary: Vec<(String, String)>,
}

fn sorted_by_label(snapshot: &OntologySnapshot, iris: impl IntoIterator<Item = Iri>) -> Vec<(String, Iri)> {
    let mut v: Vec<(String, Iri)> = iris.into_iter().map(|i| (display_name(snapshot, &i), i)).collect();
    v.sort();
    v
}

pub fn build_docs(title: &str, snapshot: &OntologySnapshot, glossary: &[GlossaryEntry]) -> DocBundle {
    let labels = |iris: Vec<&Iri>| -> Vec<String> {
        sorted_by_label(snapshot, iris.into_iter().cloned()).into_iter().map(|(l, _)| l).collect()
    };
    let mut by_domain: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
    for (prop, domains) in &snapshot.domains {
        for d in domains {
            by_domain.entry(d).or_default().push(prop);
        }
    }
    let classes = sorted_by_label(snapshot, snapshot.classes.iter().cloned())
        .into_iter()
        .map(|(label, iri)| ClassSection {
            label,
            comment: snapshot.comment(&iri).map(str::to_string),
            superclasses: labels(snapshot.parents(&iri)),
            subclasses: labels(snapshot.children(&iri)),
            properties: labels(by_domain.get(&iri).cloned().unwrap_or_default()),
            individuals: labels(snapshot.instances_of(&iri).into_iter().collect()),
            iri,
        })
        .collect();
    let properties = sorted_by_label(snapshot, snapshot.properties().cloned())
        .into_iter()
        .map(|(label, iri)| {
            let ends = |m: &BTreeMap<Iri, BTreeSet<Iri>>| -> Vec<String> {
                m.get(&iri).map(|s| labels(s.iter().collect())).unwrap_or_default()
            };
            PropertySection {
                label,
                kind: snapshot.classify(&iri),
                comment: snapshot.comment(&iri).map(str::to_string),
                domain: ends(&snapshot.domains),
                range: ends(&snapshot.ranges),
                iri,
            }
        })
        .collect();
    let mut hierarchy = Vec::new();
    let roots: Vec<&Iri> = snapshot.classes.iter().filter(|c| snapshot.parents(c).is_empty()).collect();
    for (_, root) in sorted_by_label(snapshot, roots.into_iter().cloned()) {
        outline(snapshot, &root, 0, &mut vec![], &mut hierarchy);
    }
    let mut glossary: Vec<(String, String)> =
        glossary.iter().map(|g| (g.term.clone(), g.interpretation.clone())).collect();
    glossary.sort();
    DocBundle { title: title.to_string(), classes, properties, hierarchy, glossary }
}

fn outline(snapshot: &OntologySnapshot, class: &Iri, depth: usize, path: &mut Vec<Iri>, out: &mut Vec<String>) {
    out.push(format!("{}- {}", "  ".repeat(depth), display_name(snapshot, class)));
    if path.contains(class) {
        return;
    }
    path.push(class.clone());
    for (_, child) in sorted_by_label(snapshot, snapshot.children(class).into_iter().cloned()) {
        outline(snapshot, &child, depth + 1, path, out);
    }
    path.pop();
}

fn anchor(prefix: &str, iri: &Iri) -> String {
    let local: String = iri.local_name().chars().filter(|c| c.is_alphanumeric()).collect();
    format!("{prefix}-{}", local.to_lowercase())
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

const NO_DESCRIPTION: &str = "(no description)";

impl DocBundle {
    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let w = &mut md;
        writeln!(w, "# {}\n", self.title).unwrap();
        writeln!(w, "## Contents\n").unwrap();
        writeln!(w, "- [Class hierarchy](#class-hierarchy)").unwrap();
        writeln!(w, "- [Classes](#classes)").unwrap();
        for c in &self.classes {
            writeln!(w, "  - [{}](#{})", c.label, anchor("class", &c.iri)).unwrap();
        }
        writeln!(w, "- [Properties](#properties)").unwrap();
        for p in &self.properties {
            writeln!(w, "  - [{}](#{})", p.label, anchor("property", &p.iri)).unwrap();
        }
        writeln!(w, "- [Glossary](#glossary)\n").unwrap();

        writeln!(w, "## Class hierarchy\n").unwrap();
        for line in &self.hierarchy {
            writeln!(w, "{line}").unwrap();
        }
        writeln!(w, "\n## Classes\n").unwrap();
        for c in &self.classes {
            writeln!(w, "<a id=\"{}\"></a>\n### {}\n", anchor("class", &c.iri), c.label).unwrap();
            writeln!(w, "IRI: `{}`\n", c.iri.as_str()).unwrap();
            writeln!(w, "{}\n", c.comment.as_deref().unwrap_or(NO_DESCRIPTION)).unwrap();
            writeln!(w, "- Superclasses: {}", list(&c.superclasses)).unwrap();
            writeln!(w, "- Subclasses: {}", list(&c.subclasses)).unwrap();
            writeln!(w, "- Properties: {}", list(&c.properties)).unwrap();
            writeln!(w, "- Individuals: {}\n", list(&c.individuals)).unwrap();
        }
        writeln!(w, "## Properties\n").unwrap();
        for p in &self.properties {
            let kind = if p.kind == EntityKind::DataProperty { "data property" } else { "object property" };
            writeln!(w, "<a id=\"{}\"></a>\n### {}\n", anchor("property", &p.iri), p.label).unwrap();
            writeln!(w, "IRI: `{}` ({kind})\n", p.iri.as_str()).unwrap();
            writeln!(w, "{}\n", p.comment.as_deref().unwrap_or(NO_DESCRIPTION)).unwrap();
            writeln!(w, "- Domain: {}", list(&p.domain)).unwrap();
            writeln!(w, "- Range: {}\n", list(&p.range)).unwrap();
        }
        writeln!(w, "## Glossary\n").unwrap();
        if self.glossary.is_empty() {
            writeln!(w, "No glossary terms.").unwrap();
        }
        for (term, meaning) in &self.glossary {
            writeln!(w, "- **{term}**: {meaning}").unwrap();
        }
        md
    }
}

/// Markdown for a snapshot; identical inputs give identical bytes.
pub fn emit_markdown_docs(title: &str, snapshot: &OntologySnapshot, glossary: &[GlossaryEntry]) -> String {
    build_docs(title, snapshot, glossary).to_markdown()
}
