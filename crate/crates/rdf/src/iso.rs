//! Graph isomorphism under blank-node relabelling.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::graph::Graph;
use crate::term::{Term, Triple};

/// True iff `a` and `b` are equal up to a bijective renaming of blank nodes.
/// Blank-node-free graphs reduce to set equality.
pub fn graphs_equal(a: &Graph, b: &Graph) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if !a.has_blank_nodes() && !b.has_blank_nodes() {
        return a == b;
    }
    let is_ground = |t: &&Triple| !t.subject().is_blank() && !t.object().is_blank();
    let ground_a: Vec<&Triple> = a.iter().filter(is_ground).collect();
    let ground_b = b.iter().filter(is_ground).count();
    if ground_a.len() != ground_b || !ground_a.iter().all(|t| b.contains(t)) {
        return false;
    }

    let sig_a = signatures(a);
    let sig_b = signatures(b);
    if sig_a.len() != sig_b.len() {
        return false;
    }
    let mut candidates: Vec<(String, Vec<String>)> = sig_a
        .iter()
        .map(|(label, sig)| {
            let matching = sig_b.iter().filter(|(_, other)| *other == sig).map(|(l, _)| l.clone()).collect();
            (label.clone(), matching)
        })
        .collect();
    if candidates.iter().any(|(_, c)| c.is_empty()) {
        return false;
    }
    candidates.sort_by_key(|(_, c)| c.len());

    let mut touching: HashMap<&str, Vec<&Triple>> = HashMap::new();
    for t in a.iter().filter(|t| !is_ground(t)) {
        for term in [t.subject(), t.object()] {
            if let Term::BlankNode(label) = term {
                touching.entry(label.as_str()).or_default().push(t);
            }
        }
    }

    let mut search =
        Search { b, candidates: &candidates, touching: &touching, mapping: HashMap::new(), used: HashSet::new() };
    search.run(0)
}

/// Structural fingerprint of each blank node: degree and the predicates and
/// ground neighbours it is connected through.
fn signatures(g: &Graph) -> BTreeMap<String, Vec<String>> {
    let mut sigs: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let other_end = |t: &Term| match t {
        Term::BlankNode(_) => "_".to_string(),
        other => other.to_ntriples(),
    };
    for t in g.iter() {
        if let Term::BlankNode(label) = t.subject() {
            sigs.entry(label.clone()).or_default().push(format!(
                "s {} {}",
                t.predicate().as_str(),
                other_end(t.object())
            ));
        }
        if let Term::BlankNode(label) = t.object() {
            sigs.entry(label.clone()).or_default().push(format!(
                "o {} {}",
                t.predicate().as_str(),
                other_end(t.subject())
            ));
        }
    }
    for sig in sigs.values_mut() {
        sig.sort();
    }
    sigs
}

struct Search<'a> {
    b: &'a Graph,
    candidates: &'a [(String, Vec<String>)],
    touching: &'a HashMap<&'a str, Vec<&'a Triple>>,
    mapping: HashMap<&'a str, &'a str>,
    used: HashSet<&'a str>,
}

impl<'a> Search<'a> {
    fn run(&mut self, depth: usize) -> bool {
        let Some((label, options)) = self.candidates.get(depth) else {
            return true;
        };
        for target in options {
            if self.used.contains(target.as_str()) {
                continue;
            }
            self.mapping.insert(label, target);
            self.used.insert(target);
            if self.consistent(label) && self.run(depth + 1) {
                return true;
            }
            self.mapping.remove(label.as_str());
            self.used.remove(target.as_str());
        }
        false
    }

    fn consistent(&self, label: &str) -> bool {
        let map = |t: &Term| -> Option<Term> {
            match t {
                Term::BlankNode(l) => self.mapping.get(l.as_str()).map(|m| Term::BlankNode(m.to_string())),
                other => Some(other.clone()),
            }
        };
        self.touching.get(label).into_iter().flatten().all(|t| match (map(t.subject()), map(t.object())) {
            (Some(s), Some(o)) => {
                Triple::new(s, t.predicate().clone(), o).map(|mapped| self.b.contains(&mapped)).unwrap_or(false)
            }
            _ => true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Iri;
    use crate::turtle::parse_turtle;

    fn g(doc: &str) -> Graph {
        parse_turtle(&format!("@prefix ex: <http://e/> .\n{doc}"), None).unwrap().0
    }

    #[test]
    fn self_equality_and_missing_triple() {
        let a = g("ex:a ex:p ex:b . ex:b ex:p ex:c .");
        assert!(graphs_equal(&a, &a));
        let mut smaller = a.clone();
        let first = smaller.iter().next().unwrap().clone();
        smaller.remove(&first);
        assert!(!graphs_equal(&a, &smaller));
    }

    #[test]
    fn relabelled_blank_nodes_match() {
        let a = g("_:x ex:p _:y . _:y ex:p ex:c . _:x ex:q \"1\" .");
        let b = g("_:m ex:p _:n . _:n ex:p ex:c . _:m ex:q \"1\" .");
        assert!(graphs_equal(&a, &b));
        let c = g("_:m ex:p _:n . _:m ex:p ex:c . _:n ex:q \"1\" .");
        assert!(!graphs_equal(&a, &c));
    }

    /// Every permutation of blank labels over a small cyclic graph must be
    /// recognised; the oracle enumerates all label bijections explicitly.
    #[test]
    fn permuted_labels_agree_with_exhaustive_bijections() {
        let labels = ["b0", "b1", "b2", "b3"];
        let p = Iri::new("http://e/p").unwrap();
        let q = Iri::new("http://e/q").unwrap();
        let edges = [(0, 1, &p), (1, 2, &p), (2, 3, &q), (3, 0, &p), (0, 2, &q)];
        let build = |names: &[&str]| -> Graph {
            edges
                .iter()
                .map(|(s, o, pred)| {
                    Triple::new(Term::blank(names[*s]), (*pred).clone(), Term::blank(names[*o])).unwrap()
                })
                .collect()
        };
        let base = build(&labels);
        let mut perms = Vec::new();
        permute(&mut labels.to_vec(), 0, &mut perms);
        for perm in perms {
            let renamed = build(
                &perm
                    .iter()
                    .map(|s| format!("z{s}"))
                    .collect::<Vec<_>>()
                    .iter()
                    .map(String::as_str)
                    .collect::<Vec<_>>(),
            );
            assert!(graphs_equal(&base, &renamed));
            // oracle: some bijection maps base exactly onto renamed
            let found = brute_force_iso(&base, &renamed);
            assert!(found);
        }
        // a structurally different graph: flip one edge direction
        let mut flipped = base.clone();
        let t = Triple::new(Term::blank("b0"), p.clone(), Term::blank("b1")).unwrap();
        flipped.remove(&t);
        flipped.insert(Triple::new(Term::blank("b1"), p, Term::blank("b0")).unwrap());
        assert_eq!(graphs_equal(&base, &flipped), brute_force_iso(&base, &flipped));
    }

    fn permute<'a>(items: &mut Vec<&'a str>, k: usize, out: &mut Vec<Vec<&'a str>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, out);
            items.swap(k, i);
        }
    }

    fn brute_force_iso(a: &Graph, b: &Graph) -> bool {
        let la: Vec<String> = a.blank_labels().into_iter().map(str::to_owned).collect();
        let lb: Vec<&str> = b.blank_labels().into_iter().collect();
        if la.len() != lb.len() || a.len() != b.len() {
            return false;
        }
        let mut perms = Vec::new();
        permute(&mut lb.clone(), 0, &mut perms);
        perms.into_iter().any(|perm| {
            let map: HashMap<&str, &str> = la.iter().map(String::as_str).zip(perm).collect();
            let rename = |t: &Term| match t {
                Term::BlankNode(l) => Term::blank(map[l.as_str()]),
                other => other.clone(),
            };
            a.iter().all(|t| {
                b.contains(&Triple::new(rename(t.subject()), t.predicate().clone(), rename(t.object())).unwrap())
            })
        })
    }
}
