//! Random graph/query generators and an exhaustive-enumeration query oracle.
//! The oracle shares no code with the evaluator: it tries every assignment of
//! graph terms to query variables and checks each pattern by set membership.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BTreeSet;

use ontoforge_rdf::sparql::{CompareOp, Constant, PatternTerm, Query, TriplePattern};
use ontoforge_rdf::term::{Iri, Literal, Term, Triple};
use ontoforge_rdf::vocab::xsd;
use ontoforge_rdf::Graph;
use rand::seq::SliceRandom;
use rand::Rng;

pub const NS: &str = "http://example.org/t#";

pub fn node(i: usize) -> Term {
    Term::Iri(Iri::new(format!("{NS}n{i}")).unwrap())
}

pub fn pred(i: usize) -> Iri {
    Iri::new(format!("{NS}p{i}")).unwrap()
}

pub fn random_object<R: Rng>(rng: &mut R) -> Term {
    match rng.gen_range(0..10) {
        0..=4 => node(rng.gen_range(0..6)),
        5 | 6 => Term::Literal(Literal::integer(rng.gen_range(0..6))),
        7 => Term::Literal(
            Literal::typed(["2.5", "4.0", "n/a"][rng.gen_range(0..3)], Iri::new(xsd::DECIMAL).unwrap()).unwrap(),
        ),
        8 => Term::Literal(Literal::simple(["alpha", "beta", "gamma"][rng.gen_range(0..3)])),
        _ => Term::Literal(Literal::lang("alpha", "en").unwrap()),
    }
}

pub fn random_graph<R: Rng>(rng: &mut R, max: usize) -> Graph {
    let target = rng.gen_range(0..=max);
    let mut g = Graph::new();
    let mut attempts = 0;
    while g.len() < target && attempts < max * 20 {
        attempts += 1;
        let t = Triple::new(node(rng.gen_range(0..6)), pred(rng.gen_range(0..3)), random_object(rng)).unwrap();
        g.insert(t);
    }
    g
}

fn term_text(t: &Term) -> String {
    match t {
        Term::Iri(i) => format!("<{}>", i.as_str()),
        Term::BlankNode(b) => format!("_:{b}"),
        Term::Literal(l) => {
            let mut s = format!("\"{}\"", l.lexical());
            if let Some(tag) = l.language() {
                s.push('@');
                s.push_str(tag);
            } else if let Some(dt) = l.datatype() {
                s.push_str(&format!("^^<{}>", dt.as_str()));
            }
            s
        }
    }
}

/// A random query over at most three patterns and at most one filter, as text.
pub fn random_query_text<R: Rng>(rng: &mut R) -> String {
    let node_vars = ["a", "b", "c"];
    let n_patterns = rng.gen_range(1..=3);
    let mut patterns = Vec::new();
    let mut bound: Vec<&str> = Vec::new();
    for _ in 0..n_patterns {
        let take = |v: &'static str, bound: &mut Vec<&str>| {
            if !bound.contains(&v) {
                bound.push(v);
            }
            format!("?{v}")
        };
        let s = if rng.gen_bool(0.85) {
            take(node_vars.choose(rng).unwrap(), &mut bound)
        } else {
            term_text(&node(rng.gen_range(0..6)))
        };
        let p =
            if rng.gen_bool(0.2) { take("p", &mut bound) } else { format!("<{}>", pred(rng.gen_range(0..3)).as_str()) };
        let o = match rng.gen_range(0..10) {
            0..=5 => take(node_vars.choose(rng).unwrap(), &mut bound),
            6 | 7 => take("v", &mut bound),
            _ => term_text(&random_object(rng)),
        };
        patterns.push(format!("{s} {p} {o} ."));
    }
    if bound.is_empty() {
        bound.push("a");
        bound.push("a_x");
        patterns.push(format!("?a <{NS}p0> ?a_x ."));
    }
    let mut select: Vec<&str> = bound.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
    if select.is_empty() {
        select.push(bound[0]);
    }
    let mut body = patterns.join(" ");
    if rng.gen_bool(0.6) {
        let v = if bound.contains(&"v") && rng.gen_bool(0.75) { &"v" } else { bound.choose(rng).unwrap() };
        let op = ["<", ">", "<=", ">=", "=", "!="][rng.gen_range(0..6)];
        let constant = match rng.gen_range(0..3) {
            0 | 1 => format!("{}", rng.gen_range(0..6)),
            _ => format!("\"{}\"", ["alpha", "beta", "gamma"][rng.gen_range(0..3)]),
        };
        body.push_str(&format!(" FILTER(?{v} {op} {constant})"));
    }
    let mut q =
        format!("SELECT {} WHERE {{ {body} }}", select.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join(" "));
    if rng.gen_bool(0.4) {
        let v = bound.choose(rng).unwrap();
        q.push_str(&if rng.gen_bool(0.5) { format!(" ORDER BY ?{v}") } else { format!(" ORDER BY DESC(?{v})") });
    }
    if rng.gen_bool(0.3) {
        q.push_str(&format!(" LIMIT {}", rng.gen_range(1..5)));
    }
    q
}

fn numeric(t: &Term) -> Option<f64> {
    let Term::Literal(l) = t else { return None };
    let dt = l.datatype()?.as_str();
    if dt != xsd::INTEGER && dt != xsd::DECIMAL {
        return None;
    }
    l.lexical()
        .parse::<f64>()
        .ok()
        .filter(|_| l.lexical().chars().all(|c| c.is_ascii_digit() || c == '.' || c == '-' || c == '+'))
}

/// Some(true/false) for a definite verdict; None when the comparison is a type error.
fn oracle_filter(op: CompareOp, value: &Term, constant: &Constant) -> Option<bool> {
    let cmp = |o: Ordering| match op {
        CompareOp::Lt => o == Ordering::Less,
        CompareOp::Gt => o == Ordering::Greater,
        CompareOp::Le => o != Ordering::Greater,
        CompareOp::Ge => o != Ordering::Less,
        CompareOp::Eq => o == Ordering::Equal,
        CompareOp::Ne => o != Ordering::Equal,
    };
    match constant {
        Constant::Number(n) => numeric(value).map(|v| cmp(v.partial_cmp(n).unwrap())),
        Constant::Text(s) => match value {
            Term::Literal(l) if l.datatype().is_none() && l.language().is_none() => {
                Some(cmp(l.lexical().cmp(s.as_str())))
            }
            _ => match op {
                CompareOp::Eq => Some(false),
                CompareOp::Ne => Some(true),
                _ => None,
            },
        },
    }
}

fn oracle_key_cmp(a: &Term, b: &Term) -> Ordering {
    let class = |t: &Term| match t {
        Term::BlankNode(_) => 0,
        Term::Iri(_) => 1,
        Term::Literal(_) => {
            if numeric(t).is_some() {
                2
            } else {
                3
            }
        }
    };
    class(a).cmp(&class(b)).then_with(|| match (a, b) {
        (Term::Iri(x), Term::Iri(y)) => x.as_str().cmp(y.as_str()),
        (Term::BlankNode(x), Term::BlankNode(y)) => x.cmp(y),
        _ => match (numeric(a), numeric(b)) {
            (Some(x), Some(y)) => x.partial_cmp(&y).unwrap(),
            _ => {
                let (Term::Literal(x), Term::Literal(y)) = (a, b) else { unreachable!() };
                x.lexical().cmp(y.lexical()).then_with(|| term_text(a).cmp(&term_text(b)))
            }
        },
    })
}

pub struct OracleOutcome {
    /// Every satisfying projected row, unordered.
    pub rows: Vec<Vec<Term>>,
    /// The ORDER BY key of each row in `rows`, when ordered.
    pub keys: Vec<Option<Term>>,
    pub type_errors: usize,
}

pub fn vars_of(query: &Query) -> Vec<String> {
    let mut vars: Vec<String> = Vec::new();
    for p in &query.patterns {
        for v in p.vars() {
            if !vars.iter().any(|x| x == v) {
                vars.push(v.to_string());
            }
        }
    }
    vars
}

/// Enumerates all assignments of graph terms to the
/// query's variables.
pub fn oracle(graph: &Graph, query: &Query) -> OracleOutcome {
    let vars = vars_of(query);
    let mut universe: BTreeSet<Term> = BTreeSet::new();
    for t in graph.iter() {
        universe.insert(t.subject().clone());
        universe.insert(Term::Iri(t.predicate().clone()));
        universe.insert(t.object().clone());
    }
    let universe: Vec<Term> = universe.into_iter().collect();
    let mut out = OracleOutcome { rows: Vec::new(), keys: Vec::new(), type_errors: 0 };
    if universe.is_empty() && !vars.is_empty() {
        return out;
    }
    // Each pattern is checked as soon as its last variable is assigned, which
    // prunes the odometer without changing the set of assignments accepted.
    let last_var = |p: &TriplePattern| p.vars().map(|v| vars.iter().position(|x| x == v).unwrap()).max();
    let mut checks: Vec<Vec<&TriplePattern>> = vec![Vec::new(); vars.len() + 1];
    for p in &query.patterns {
        checks[last_var(p).map_or(0, |i| i + 1)].push(p);
    }
    let mut assignment: Vec<Option<&Term>> = vec![None; vars.len()];
    if holds(graph, &checks[0], &vars, &assignment) {
        enumerate(graph, query, &vars, &universe, &checks, 0, &mut assignment, &mut out);
    }
    out
}

fn holds(graph: &Graph, patterns: &[&TriplePattern], vars: &[String], assignment: &[Option<&Term>]) -> bool {
    let inst = |pt: &PatternTerm| -> Term {
        match pt {
            PatternTerm::Term(t) => t.clone(),
            PatternTerm::Var(v) => assignment[vars.iter().position(|x| x == v).unwrap()].unwrap().clone(),
        }
    };
    patterns.iter().all(|p| {
        let (s, pr, o) = (inst(&p.subject), inst(&p.predicate), inst(&p.object));
        match (pr, s.is_literal()) {
            (Term::Iri(pi), false) => graph.contains(&Triple::new(s, pi, o).unwrap()),
            _ => false,
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate<'a>(
    graph: &Graph,
    query: &Query,
    vars: &[String],
    universe: &'a [Term],
    checks: &[Vec<&TriplePattern>],
    depth: usize,
    assignment: &mut Vec<Option<&'a Term>>,
    out: &mut OracleOutcome,
) {
    if depth == vars.len() {
        let value = |name: &str| assignment[vars.iter().position(|v| v == name).unwrap()].unwrap();
        for f in &query.filters {
            match oracle_filter(f.op, value(&f.variable), &f.constant) {
                Some(true) => {}
                Some(false) => return,
                None => {
                    out.type_errors += 1;
                    return;
                }
            }
        }
        out.rows.push(query.select.iter().map(|v| value(v).clone()).collect());
        out.keys.push(query.order_by.as_ref().map(|o| value(&o.variable).clone()));
        return;
    }
    for term in universe {
        assignment[depth] = Some(term);
        if holds(graph, &checks[depth + 1], vars, assignment) {
            enumerate(graph, query, vars, universe, checks, depth + 1, assignment, out);
        }
    }
    assignment[depth] = None;
}

/// Checks an evaluator result against the oracle, honouring ORDER BY and LIMIT.
/// Returns a description of the first disagreement.
pub fn check_against_oracle(graph: &Graph, query: &Query) -> Result<(), String> {
    let got = ontoforge_rdf::evaluate(graph, query);
    let want = oracle(graph, query);
    let rows: Vec<Vec<Term>> =
        got.solutions.iter().map(|s| s.bindings.iter().map(|(_, t)| t.clone()).collect()).collect();
    let sorted = |mut v: Vec<Vec<Term>>| {
        v.sort();
        v
    };
    match &query.order_by {
        None => {
            let expected_len = query.limit.map_or(want.rows.len(), |l| l.min(want.rows.len()));
            if rows.len() != expected_len {
                return Err(format!("row count {} != {}", rows.len(), expected_len));
            }
            if query.limit.is_none() && sorted(rows.clone()) != sorted(want.rows.clone()) {
                return Err("row multiset differs".into());
            }
        }
        Some(order) => {
            // Ordered results are checked on full assignments, so every row
            // carries its own sort key and duplicates cannot arise.
            let mut full = query.clone();
            full.select = vars_of(query);
            let key_pos = full.select.iter().position(|v| *v == order.variable).unwrap();
            let got_full: Vec<Vec<Term>> = ontoforge_rdf::evaluate(graph, &full)
                .solutions
                .iter()
                .map(|s| s.bindings.iter().map(|(_, t)| t.clone()).collect())
                .collect();
            let mut want_full = oracle(graph, &full).rows;
            want_full.sort_by(|a, b| {
                let o = oracle_key_cmp(&a[key_pos], &b[key_pos]);
                if order.ascending {
                    o
                } else {
                    o.reverse()
                }
            });
            let k = query.limit.unwrap_or(want_full.len()).min(want_full.len());
            if got_full.len() != k || rows.len() != k {
                return Err(format!("row count {} != {}", got_full.len(), k));
            }
            let mut remaining = want_full.clone();
            for (i, row) in got_full.iter().enumerate() {
                let Some(pos) = remaining.iter().position(|r| r == row) else {
                    return Err(format!("row {row:?} not produced by oracle"));
                };
                remaining.remove(pos);
                if oracle_key_cmp(&row[key_pos], &want_full[i][key_pos]) != Ordering::Equal {
                    return Err(format!("sort key mismatch at position {i}"));
                }
            }
            // the projected query must return the projection of the same rows
            let projected: Vec<Vec<Term>> = got_full
                .iter()
                .map(|r| {
                    query.select.iter().map(|v| r[full.select.iter().position(|x| x == v).unwrap()].clone()).collect()
                })
                .collect();
            if projected != rows {
                return Err("projection of ordered rows differs".into());
            }
        }
    }
    if got.type_warnings != want.type_errors {
        return Err(format!("type warnings {} != {}", got.type_warnings, want.type_errors));
    }
    Ok(())
}
