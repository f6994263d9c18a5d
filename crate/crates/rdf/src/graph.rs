//! Indexed in-memory triple set.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::term::{Iri, Term, Triple};

/// A set of triples with subject/predicate/object indexes. Iteration follows
/// insertion order; equality is set equality.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    triples: Vec<Triple>,
    members: HashSet<Triple>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Iri, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Inserts a triple; returns `false` if it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if self.members.contains(&triple) {
            return false;
        }
        let idx = self.triples.len();
        self.by_subject.entry(triple.subject().clone()).or_default().push(idx);
        self.by_predicate.entry(triple.predicate().clone()).or_default().push(idx);
        self.by_object.entry(triple.object().clone()).or_default().push(idx);
        self.members.insert(triple.clone());
        self.triples.push(triple);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.members.contains(triple)
    }

    /// Removes a triple; indexes are rebuilt, which is linear in the graph size.
    pub fn remove(&mut self, triple: &Triple) -> bool {
        if !self.members.remove(triple) {
            return false;
        }
        let kept: Vec<Triple> = self.triples.drain(..).filter(|t| t != triple).collect();
        self.rebuild(kept);
        true
    }

    /// Removes every triple for which `pred` holds; returns the number removed.
    pub fn remove_where(&mut self, mut pred: impl FnMut(&Triple) -> bool) -> usize {
        let before = self.triples.len();
        let kept: Vec<Triple> = self.triples.drain(..).filter(|t| !pred(t)).collect();
        self.members = kept.iter().cloned().collect();
        self.rebuild(kept);
        before - self.triples.len()
    }

    fn rebuild(&mut self, triples: Vec<Triple>) {
        self.by_subject.clear();
        self.by_predicate.clear();
        self.by_object.clear();
        self.triples.clear();
        self.members.clear();
        for t in triples {
            self.insert(t);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Triples matching every bound position. Uses the smallest applicable index.
    pub fn matching<'a>(
        &'a self,
        subject: Option<&Term>,
        predicate: Option<&Iri>,
        object: Option<&Term>,
    ) -> Vec<&'a Triple> {
        let mut candidates: Option<&Vec<usize>> = None;
        let mut narrow = |list: Option<&'a Vec<usize>>| -> bool {
            match list {
                None => false,
                Some(list) => {
                    if candidates.is_none_or(|c| list.len() < c.len()) {
                        candidates = Some(list);
                    }
                    true
                }
            }
        };
        if let Some(s) = subject {
            if !narrow(self.by_subject.get(s)) {
                return Vec::new();
            }
        }
        if let Some(p) = predicate {
            if !narrow(self.by_predicate.get(p)) {
                return Vec::new();
            }
        }
        if let Some(o) = object {
            if !narrow(self.by_object.get(o)) {
                return Vec::new();
            }
        }
        let keep = |t: &&Triple| {
            subject.is_none_or(|s| t.subject() == s)
                && predicate.is_none_or(|p| t.predicate() == p)
                && object.is_none_or(|o| t.object() == o)
        };
        match candidates {
            Some(list) => list.iter().map(|&i| &self.triples[i]).filter(keep).collect(),
            None => self.triples.iter().collect(),
        }
    }

    /// Convenience lookup by predicate IRI string.
    pub fn with_predicate(&self, predicate: &str) -> Vec<&Triple> {
        match self.by_predicate.iter().find(|(p, _)| p.as_str() == predicate) {
            Some((_, list)) => list.iter().map(|&i| &self.triples[i]).collect(),
            None => Vec::new(),
        }
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(&'a self, subject: &Term, predicate: &str) -> Vec<&'a Term> {
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .map(|&i| &self.triples[i])
            .filter(|t| t.predicate().as_str() == predicate)
            .map(Triple::object)
            .collect()
    }

    /// Blank-node labels used anywhere in the graph.
    pub fn blank_labels(&self) -> BTreeSet<&str> {
        let mut labels = BTreeSet::new();
        for t in &self.triples {
            for term in [t.subject(), t.object()] {
                if let Term::BlankNode(label) = term {
                    labels.insert(label.as_str());
                }
            }
        }
        labels
    }

    pub fn has_blank_nodes(&self) -> bool {
        self.triples.iter().any(|t| t.subject().is_blank() || t.object().is_blank())
    }

    /// Ends the single-writer construction phase; the result is shareable for reads.
    pub fn freeze(self) -> Arc<Graph> {
        Arc::new(self)
    }

    /// Set union with `other`; blank labels from `other` that collide with
    /// labels in `self` are renamed first.
    pub fn merge(&self, other: &Graph) -> Graph {
        let mut out = self.clone();
        out.absorb(other);
        out
    }

    /// In-place form of [`Graph::merge`].
    pub fn absorb(&mut self, other: &Graph) {
        let taken: HashSet<String> = self.blank_labels().into_iter().map(str::to_owned).collect();
        let mut renames: HashMap<String, String> = HashMap::new();
        if !taken.is_empty() {
            let theirs: BTreeSet<&str> = other.blank_labels();
            let mut used: HashSet<String> = taken.clone();
            used.extend(theirs.iter().map(|s| s.to_string()));
            for label in theirs {
                if taken.contains(label) {
                    let mut n = 1;
                    let fresh = loop {
                        let candidate = format!("{label}_{n}");
                        if !used.contains(&candidate) {
                            break candidate;
                        }
                        n += 1;
                    };
                    used.insert(fresh.clone());
                    renames.insert(label.to_string(), fresh);
                }
            }
        }
        let rename = |term: &Term| match term {
            Term::BlankNode(label) => match renames.get(label) {
                Some(fresh) => Term::BlankNode(fresh.clone()),
                None => term.clone(),
            },
            _ => term.clone(),
        };
        for t in other.iter() {
            let triple = Triple::new(rename(t.subject()), t.predicate().clone(), rename(t.object()))
                .expect("renaming preserves triple shape");
            self.insert(triple);
        }
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for Graph {}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        for t in iter {
            g.insert(t);
        }
        g
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = std::slice::Iter<'a, Triple>;
    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}
