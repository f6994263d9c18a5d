//! Lexical retrieval over a local document corpus.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub text: String,
}

impl Document {
    /// Title is the first non-blank line with any leading `#` removed.
    pub fn from_text(id: &str, text: &str) -> Self {
        let title = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or(id).trim_start_matches('#').trim();
        Document { id: id.to_string(), title: title.to_string(), text: text.to_string() }
    }
}

/// Lowercased maximal alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusIndex {
    docs: Vec<Document>,
    /// Document frequency per term.
    df: BTreeMap<String, usize>,
    /// Term frequency per document, aligned with `docs`; title and text both count.
    tf: Vec<BTreeMap<String, usize>>,
}

impl CorpusIndex {
    pub fn build(docs: Vec<Document>) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let tf: Vec<BTreeMap<String, usize>> = docs
            .iter()
            .map(|d| {
                let mut counts = BTreeMap::new();
                for t in tokenize(&d.title).into_iter().chain(tokenize(&d.text)) {
                    *counts.entry(t).or_insert(0) += 1;
                }
                for t in counts.keys() {
                    *df.entry(t.clone()).or_insert(0) += 1;
                }
                counts
            })
            .collect();
        CorpusIndex { docs, df, tf }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.docs.iter().find(|d| d.id == id)
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn term_frequency(&self, doc_id: &str, term: &str) -> usize {
        self.docs.iter().position(|d| d.id == doc_id).and_then(|i| self.tf[i].get(term).copied()).unwrap_or(0)
    }

    /// Σ over distinct query terms t of tf(t,d)·ln(1 + N/df(t)).
    pub fn score(&self, doc_index: usize, query: &str) -> f64 {
        let n = self.docs.len() as f64;
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        terms
            .iter()
            .filter_map(|t| {
                let df = *self.df.get(t)?;
                let tf = *self.tf[doc_index].get(t)?;
                Some(tf as f64 * (1.0 + n / df as f64).ln())
            })
            .sum()
    }

    /// Top `k` documents with positive score, by descending score then id.
    pub fn retrieve(&self, query: &str, k: usize) -> Vec<(String, f64)> {
        let mut scored: Vec<(String, f64)> = (0..self.docs.len())
            .map(|i| (self.docs[i].id.clone(), self.score(i, query)))
            .filter(|(_, s)| *s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
    }
}
