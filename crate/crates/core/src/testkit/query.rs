use std::fmt;

use ontoforge_rdf::vocab::{owl, rdf, rdfs, xsd};
use ontoforge_rdf::{evaluate, parse_query, render_term, Graph, Iri, PrefixMap, Query, Term};
use serde::{Deserialize, Serialize};

use super::{CaseOutcome, CaseStatus, TierResult};
use crate::onto::OntologySnapshot;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expectation {
    MinRows(usize),
    ExactRows(usize),
    /// Some row binds `var` to `term`; `term` is an IRI, a prefixed name, an
    /// N-Triples term, or a literal's lexical form.
    ContainsBinding {
        var: String,
        term: String,
    },
    Empty,
}

impl Default for Expectation {
    fn default() -> Self {
        Expectation::MinRows(1)
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::MinRows(n) => write!(f, "at least {n} rows"),
            Expectation::ExactRows(n) => write!(f, "exactly {n} rows"),
            Expectation::ContainsBinding { var, term } => write!(f, "?{} = {term}", var.trim_start_matches('?')),
            Expectation::Empty => f.write_str("no rows"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    #[serde(rename = "cqId")]
    pub cq_id: String,
    pub query: String,
    #[serde(default)]
    pub expectation: Expectation,
    #[serde(default)]
    pub description: String,
}

/// Prepends PREFIX lines for project prefixes the query does not declare.
pub fn prepare_query(text: &str, prefixes: &PrefixMap) -> String {
    let lower = text.to_lowercase();
    let mut head = String::new();
    for (label, ns) in prefixes.iter() {
        let declared = lower.match_indices("prefix").any(|(i, _)| {
            lower[i + 6..].trim_start().strip_prefix(&label.to_lowercase()).is_some_and(|r| r.starts_with(':'))
        });
        if !declared {
            head.push_str(&format!("PREFIX {label}: <{ns}>\n"));
        }
    }
    head + text
}

/// IRIs in `query` that are neither vocabulary nor known to `snapshot`.
pub fn unknown_iris(query: &Query, snapshot: &OntologySnapshot) -> Vec<Iri> {
    let vocabulary = |i: &Iri| [rdf::NS, rdfs::NS, owl::NS, xsd::NS].iter().any(|ns| i.as_str().starts_with(ns));
    let mut out: Vec<Iri> = query
        .iris()
        .into_iter()
        .filter(|i| !vocabulary(i))
        .filter(|i| {
            !snapshot.classes.contains(*i)
                && !snapshot.object_properties.contains(*i)
                && !snapshot.data_properties.contains(*i)
                && !snapshot.individuals.contains(*i)
        })
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    out
}

fn term_matches(bound: &Term, spec: &str, prefixes: &PrefixMap) -> bool {
    let spec = spec.trim();
    if bound.to_ntriples() == spec || render_term(bound, prefixes) == spec {
        return true;
    }
    match bound {
        Term::Iri(iri) => iri.as_str() == spec || prefixes.expand_qname(spec).is_some_and(|e| e == iri.as_str()),
        Term::Literal(lit) => {
            lit.lexical() == spec || spec.strip_prefix('"').and_then(|s| s.strip_suffix('"')) == Some(lit.lexical())
        }
        Term::BlankNode(_) => false,
    }
}

fn run_case(graph: &Graph, case: &TestCase, prefixes: &PrefixMap) -> CaseOutcome {
    let outcome = |status, actual: String| CaseOutcome {
        case_id: case.id.clone(),
        cq_id: case.cq_id.clone(),
        status,
        expected: case.expectation.to_string(),
        actual,
    };
    let query = match parse_query(&prepare_query(&case.query, prefixes)) {
        Ok(q) => q,
        Err(e) => return outcome(CaseStatus::Error, format!("query does not parse: {e}")),
    };
    let results = evaluate(graph, &query);
    let rows = results.len();
    let mut names = query.prefixes.clone();
    names.extend_missing(prefixes);
    let count = format!("{rows} rows");
    let pass = |ok: bool| if ok { CaseStatus::Pass } else { CaseStatus::Fail };
    match &case.expectation {
        Expectation::MinRows(n) => outcome(pass(rows >= *n), count),
        Expectation::ExactRows(n) => outcome(pass(rows == *n), count),
        Expectation::Empty => outcome(pass(rows == 0), count),
        Expectation::ContainsBinding { var, term } => {
            let var = var.trim_start_matches('?');
            if !results.variables.iter().any(|v| v == var) {
                return outcome(CaseStatus::Error, format!("?{var} is not selected"));
            }
            let values: Vec<&Term> = results.solutions.iter().filter_map(|s| s.get(var)).collect();
            if values.iter().any(|t| term_matches(t, term, &names)) {
                outcome(CaseStatus::Pass, count)
            } else {
                let shown: Vec<String> = values.iter().take(10).map(|t| render_term(t, &names)).collect();
                outcome(CaseStatus::Fail, format!("{count}; ?{var} in [{}]", shown.join(", ")))
            }
        }
    }
}

/// Evaluates every case; parse failures are recorded as case errors.
pub fn run_query_tests(graph: &Graph, suite: &[TestCase], prefixes: &PrefixMap) -> TierResult {
    TierResult::from_cases(suite.iter().map(|c| run_case(graph, c, prefixes)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ontoforge_rdf::parse_turtle;

    fn case(query: &str, expectation: Expectation) -> TestCase {
        TestCase { id: "T1".into(), cq_id: "CQ01".into(), query: query.into(), expectation, description: String::new() }
    }

    #[test]
    fn expectations_over_small_graph() {
        let (g, p) =
            parse_turtle("@prefix ex: <http://e/> . ex:a ex:eff 35 . ex:b ex:eff 42 . ex:c ex:eff 28 .", None).unwrap();
        let q = "SELECT ?m ?e WHERE { ?m ex:eff ?e . FILTER(?e > 30) }";
        let suite = vec![
            case(q, Expectation::ExactRows(2)),
            case(q, Expectation::MinRows(3)),
            case(q, Expectation::ContainsBinding { var: "?m".into(), term: "ex:b".into() }),
            case(q, Expectation::ContainsBinding { var: "e".into(), term: "42".into() }),
            case(q, Expectation::ContainsBinding { var: "m".into(), term: "<http://e/c>".into() }),
            case("SELECT ?x WHERE { ?x ex:none ?y }", Expectation::Empty),
            case("SELECT ?x WHERE { ?x nope:p ?y }", Expectation::Empty),
        ];
        let tier = run_query_tests(&g, &suite, &p);
        let statuses: Vec<CaseStatus> = tier.cases.iter().map(|c| c.status).collect();
        use CaseStatus::*;
        assert_eq!(statuses, [Pass, Fail, Pass, Pass, Fail, Pass, Error]);
        assert_eq!((tier.passes, tier.failures, tier.errors), (4, 2, 1));
        assert!(tier.cases[4].actual.contains("ex:a") && tier.cases[4].actual.contains("ex:b"));
        assert_eq!(run_query_tests(&g, &suite, &p), tier);
    }

    #[test]
    fn empty_graph_empty_expectation() {
        let tier = run_query_tests(
            &Graph::new(),
            &[case("SELECT ?s WHERE { ?s ?p ?o }", Expectation::Empty)],
            &PrefixMap::new(),
        );
        assert_eq!(tier.passes, 1);
    }

    #[test]
    fn prefix_injection_skips_declared_labels() {
        let mut p = PrefixMap::new();
        p.insert("ex", "http://e/");
        p.insert("ucpo", "http://u/");
        let out = prepare_query("prefix  ex: <http://other/>\nSELECT ?s WHERE { ?s ex:p ?o }", &p);
        assert!(out.starts_with("PREFIX ucpo: <http://u/>\nprefix  ex:"));
        assert_eq!(parse_query(&out).unwrap().prefixes.get("ex"), Some("http://other/"));
    }

    #[test]
    fn expectation_wire_format() {
        let e: Expectation = serde_json::from_str(r#"{"ContainsBinding":{"var":"v","term":"ex:a"}}"#).unwrap();
        assert_eq!(e, Expectation::ContainsBinding { var: "v".into(), term: "ex:a".into() });
        assert_eq!(serde_json::from_str::<Expectation>("\"Empty\"").unwrap(), Expectation::Empty);
    }
}
