use serde::{Deserialize, Serialize};

use crate::vocab::{owl, rdf, rdfs, xsd};

/// Ordered prefix label → namespace mapping. Labels are unique; re-binding a
/// label replaces its namespace in place.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixMap {
    entries: Vec<(String, String)>,
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// rdf, rdfs, owl and xsd.
    pub fn standard() -> Self {
        let mut map = PrefixMap::new();
        map.insert("rdf", rdf::NS);
        map.insert("rdfs", rdfs::NS);
        map.insert("owl", owl::NS);
        map.insert("xsd", xsd::NS);
        map
    }

    pub fn insert(&mut self, label: impl Into<String>, namespace: impl Into<String>) {
        let label = label.into();
        let namespace = namespace.into();
        match self.entries.iter_mut().find(|(l, _)| *l == label) {
            Some(entry) => entry.1 = namespace,
            None => self.entries.push((label, namespace)),
        }
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, ns)| ns.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(l, ns)| (l.as_str(), ns.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds every binding from `other` whose label is not bound here yet.
    pub fn extend_missing(&mut self, other: &PrefixMap) {
        for (label, ns) in other.iter() {
            if self.get(label).is_none() {
                self.insert(label, ns);
            }
        }
    }

    /// Expands `label:local`. Returns `None` when the label is not bound.
    pub fn expand(&self, label: &str, local: &str) -> Option<String> {
        self.get(label).map(|ns| format!("{ns}{local}"))
    }

    /// Expands a qname string of the form `label:local`.
    pub fn expand_qname(&self, qname: &str) -> Option<String> {
        let (label, local) = qname.split_once(':')?;
        self.expand(label, local)
    }

    /// Shortest valid qname for `iri`, preferring the longest matching namespace.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.entries
            .iter()
            .filter_map(|(label, ns)| {
                let local = iri.strip_prefix(ns.as_str())?;
                is_valid_local(local).then(|| (ns.len(), format!("{label}:{local}")))
            })
            .max_by_key(|(len, _)| *len)
            .map(|(_, qname)| qname)
    }
}

/// Local part accepted by the reader: letters, digits, `_`, `-`, and interior `.`.
pub fn is_valid_local(local: &str) -> bool {
    if local.is_empty() {
        return true;
    }
    let first = local.chars().next().unwrap();
    let last = local.chars().last().unwrap();
    (first.is_alphanumeric() || first == '_')
        && last != '.'
        && local.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Prefix labels accepted by the reader: empty, or a letter followed by name characters.
pub fn is_valid_label(label: &str) -> bool {
    match label.chars().next() {
        None => true,
        Some(first) => {
            first.is_alphabetic()
                && !label.ends_with('.')
                && label.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
        }
    }
}
