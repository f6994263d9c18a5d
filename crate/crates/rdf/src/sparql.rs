//! A small SPARQL SELECT subset: PREFIX, SELECT with projection, basic graph
//! patterns with `;`/`,` lists, FILTER comparisons against constants,
//! ORDER BY one variable, and LIMIT.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::lex::{syntax, Lexer, Tok, Token};
use crate::prefix::PrefixMap;
use crate::term::{Iri, Literal, Term};
use crate::turtle::{end_position, render_term};
use crate::vocab::{rdf, xsd};
use crate::RdfError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternTerm {
    Term(Term),
    Var(String),
}

impl PatternTerm {
    pub fn var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object].into_iter().filter_map(PatternTerm::var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    Gt,
    Lt,
    Ge,
    Le,
    Eq,
    Ne,
}

impl CompareOp {
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CompareOp::Gt => ord == Ordering::Greater,
            CompareOp::Lt => ord == Ordering::Less,
            CompareOp::Ge => ord != Ordering::Less,
            CompareOp::Le => ord != Ordering::Greater,
            CompareOp::Eq => ord == Ordering::Equal,
            CompareOp::Ne => ord != Ordering::Equal,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Gt => ">",
            CompareOp::Lt => "<",
            CompareOp::Ge => ">=",
            CompareOp::Le => "<=",
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
        }
    }

    fn is_equality(self) -> bool {
        matches!(self, CompareOp::Eq | CompareOp::Ne)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Constant {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterExpr {
    pub variable: String,
    pub op: CompareOp,
    pub constant: Constant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderBy {
    pub variable: String,
    pub ascending: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub prefixes: PrefixMap,
    pub select: Vec<String>,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
    pub order_by: Option<OrderBy>,
    pub limit: Option<usize>,
}

impl Query {
    /// Every IRI mentioned in the query's patterns, after prefix expansion.
    pub fn iris(&self) -> Vec<&Iri> {
        self.patterns
            .iter()
            .flat_map(|p| [&p.subject, &p.predicate, &p.object])
            .filter_map(|t| match t {
                PatternTerm::Term(Term::Iri(iri)) => Some(iri),
                PatternTerm::Term(Term::Literal(lit)) => lit.datatype(),
                _ => None,
            })
            .collect()
    }

    fn pattern_vars(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for v in self.patterns.iter().flat_map(TriplePattern::vars) {
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        seen
    }
}

/// Parses query text. Qnames expand only through the query's own PREFIX lines.
pub fn parse_query(text: &str) -> Result<Query, RdfError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut p = QueryParser { tokens, pos: 0, eof: end_position(text), prefixes: PrefixMap::new() };
    p.query()
}

struct QueryParser {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
    prefixes: PrefixMap,
}

impl QueryParser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += usize::from(t.is_some());
        t
    }

    fn err_here(&self, reason: impl Into<String>) -> RdfError {
        match self.tokens.get(self.pos) {
            Some(t) => syntax(t.line, t.column, reason),
            None => syntax(self.eof.0, self.eof.1, reason),
        }
    }

    fn found(&self) -> String {
        self.peek().map(Tok::describe).unwrap_or_else(|| "end of input".into())
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), RdfError> {
        if self.is_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(format!("expected {kw}, found {}", self.found())))
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), RdfError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(format!("expected {}, found {}", tok.describe(), self.found())))
        }
    }

    fn query(&mut self) -> Result<Query, RdfError> {
        while self.is_keyword("prefix") {
            self.pos += 1;
            let label = match self.next() {
                Some(Token { tok: Tok::PName { prefix, local }, .. }) if local.is_empty() => prefix,
                _ => {
                    self.pos -= 1;
                    return Err(self.err_here(format!("expected prefix label, found {}", self.found())));
                }
            };
            match self.next() {
                Some(Token { tok: Tok::Iri(ns), line, column }) => {
                    Iri::new(ns.clone()).map_err(|e| syntax(line, column, e.to_string()))?;
                    self.prefixes.insert(label, ns);
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.err_here(format!("expected namespace IRI, found {}", self.found())));
                }
            }
        }

        self.expect_keyword("select")?;
        let mut select = Vec::new();
        let mut star = false;
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            star = true;
        } else {
            while let Some(Tok::Var(v)) = self.peek() {
                let v = v.clone();
                self.pos += 1;
                if !select.contains(&v) {
                    select.push(v);
                }
            }
            if select.is_empty() {
                return Err(self.err_here(format!("expected variables or '*' after SELECT, found {}", self.found())));
            }
        }

        if self.is_keyword("where") {
            self.pos += 1;
        }
        self.expect(Tok::LBrace)?;
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Dot) => {
                    self.pos += 1;
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("filter") => {
                    self.pos += 1;
                    filters.push(self.filter()?);
                }
                Some(Tok::Word(w))
                    if ["optional", "union", "bind", "values", "minus", "service", "graph"]
                        .iter()
                        .any(|k| w.eq_ignore_ascii_case(k)) =>
                {
                    return Err(self.err_here(format!("{} is not supported", w.to_uppercase())));
                }
                None => return Err(self.err_here("expected '}' before end of input")),
                _ => self.triples_block(&mut patterns)?,
            }
        }

        let mut order_by = None;
        if self.is_keyword("order") {
            self.pos += 1;
            self.expect_keyword("by")?;
            order_by = Some(self.order_condition()?);
        }
        let mut limit = None;
        if self.is_keyword("limit") {
            self.pos += 1;
            match self.next() {
                Some(Token { tok: Tok::Integer(n), line, column }) => {
                    let n: usize = n.parse().map_err(|_| syntax(line, column, "LIMIT must be a positive integer"))?;
                    if n == 0 {
                        return Err(syntax(line, column, "LIMIT must be a positive integer"));
                    }
                    limit = Some(n);
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.err_here(format!("expected integer after LIMIT, found {}", self.found())));
                }
            }
        }
        if self.pos < self.tokens.len() {
            return Err(self.err_here(format!("unexpected {} after query", self.found())));
        }

        let mut query = Query { prefixes: self.prefixes.clone(), select, patterns, filters, order_by, limit };
        let bound = query.pattern_vars().into_iter().map(str::to_owned).collect::<Vec<_>>();
        if star {
            query.select = bound.clone();
        }
        for v in &query.select {
            if !bound.contains(v) {
                return Err(RdfError::UnboundSelectVariable(v.clone()));
            }
        }
        for f in &query.filters {
            if !bound.contains(&f.variable) {
                return Err(RdfError::UnboundVariable { name: f.variable.clone(), clause: "FILTER" });
            }
        }
        if let Some(o) = &query.order_by {
            if !bound.contains(&o.variable) {
                return Err(RdfError::UnboundVariable { name: o.variable.clone(), clause: "ORDER BY" });
            }
        }
        Ok(query)
    }

    fn order_condition(&mut self) -> Result<OrderBy, RdfError> {
        match self.next().map(|t| t.tok) {
            Some(Tok::Var(v)) => Ok(OrderBy { variable: v, ascending: true }),
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("asc") || w.eq_ignore_ascii_case("desc") => {
                self.expect(Tok::LParen)?;
                let v = match self.next().map(|t| t.tok) {
                    Some(Tok::Var(v)) => v,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err_here("expected variable in ORDER BY"));
                    }
                };
                self.expect(Tok::RParen)?;
                Ok(OrderBy { variable: v, ascending: w.eq_ignore_ascii_case("asc") })
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err_here(format!("expected ORDER BY condition, found {}", self.found())))
            }
        }
    }

    fn filter(&mut self) -> Result<FilterExpr, RdfError> {
        self.expect(Tok::LParen)?;
        let variable = match self.next().map(|t| t.tok) {
            Some(Tok::Var(v)) => v,
            _ => {
                self.pos -= 1;
                return Err(self.err_here(format!("expected variable in FILTER, found {}", self.found())));
            }
        };
        let op = match self.next().map(|t| t.tok) {
            Some(Tok::Gt) => CompareOp::Gt,
            Some(Tok::Lt) => CompareOp::Lt,
            Some(Tok::Ge) => CompareOp::Ge,
            Some(Tok::Le) => CompareOp::Le,
            Some(Tok::Eq) => CompareOp::Eq,
            Some(Tok::Ne) => CompareOp::Ne,
            _ => {
                self.pos -= 1;
                return Err(self.err_here(format!("expected comparison operator, found {}", self.found())));
            }
        };
        let constant = match self.next().map(|t| t.tok) {
            Some(Tok::Integer(n)) | Some(Tok::Decimal(n)) => {
                Constant::Number(n.parse().map_err(|_| self.err_here("bad number"))?)
            }
            Some(Tok::Str(s)) => Constant::Text(s),
            _ => {
                self.pos -= 1;
                return Err(self.err_here(format!("expected numeric or string constant, found {}", self.found())));
            }
        };
        self.expect(Tok::RParen)?;
        Ok(FilterExpr { variable, op, constant })
    }

    fn triples_block(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), RdfError> {
        let subject = self.pattern_term(Position::Subject)?;
        loop {
            let predicate = self.pattern_term(Position::Predicate)?;
            loop {
                let object = self.pattern_term(Position::Object)?;
                out.push(TriplePattern { subject: subject.clone(), predicate: predicate.clone(), object });
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.peek() == Some(&Tok::Semicolon) {
                while self.peek() == Some(&Tok::Semicolon) {
                    self.pos += 1;
                }
                if matches!(self.peek(), Some(Tok::Dot) | Some(Tok::RBrace)) {
                    break;
                }
            } else {
                break;
            }
        }
        match self.peek() {
            Some(Tok::Dot) | Some(Tok::RBrace) => Ok(()),
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("filter") => Ok(()),
            _ => Err(self.err_here(format!("expected '.', ';', ',' or '}}', found {}", self.found()))),
        }
    }

    fn pattern_term(&mut self, position: Position) -> Result<PatternTerm, RdfError> {
        let Some(t) = self.next() else {
            return Err(self.err_here("unexpected end of input in triple pattern"));
        };
        let (line, column) = (t.line, t.column);
        let iri = |s: String| Iri::new(s).map_err(|e| syntax(line, column, e.to_string()));
        let term = match t.tok {
            Tok::Var(v) => return Ok(PatternTerm::Var(v)),
            Tok::Iri(i) => Term::Iri(iri(i)?),
            Tok::PName { prefix, local } => {
                let expanded = self.prefixes.expand(&prefix, &local).ok_or(RdfError::UnknownPrefix {
                    prefix: prefix.clone(),
                    line,
                    column,
                })?;
                Term::Iri(iri(expanded)?)
            }
            Tok::Word(w) if w == "a" && position == Position::Predicate => Term::Iri(Iri::from_static(rdf::TYPE)),
            Tok::Blank(_) => return Err(syntax(line, column, "blank nodes are not supported in query patterns")),
            Tok::Str(s) if position == Position::Object => self.literal_tail(s)?,
            Tok::Integer(n) if position == Position::Object => {
                Term::Literal(Literal::typed(n, Iri::from_static(xsd::INTEGER)).unwrap())
            }
            Tok::Decimal(n) if position == Position::Object => {
                Term::Literal(Literal::typed(n, Iri::from_static(xsd::DECIMAL)).unwrap())
            }
            Tok::Word(w) if (w == "true" || w == "false") && position == Position::Object => {
                Term::Literal(Literal::typed(w, Iri::from_static(xsd::BOOLEAN)).unwrap())
            }
            other => {
                return Err(syntax(line, column, format!("unexpected {} in {position:?} position", other.describe())))
            }
        };
        Ok(PatternTerm::Term(term))
    }

    fn literal_tail(&mut self, lexical: String) -> Result<Term, RdfError> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token { tok: Tok::At(tag), line, column }) => {
                self.pos += 1;
                Literal::lang(lexical, tag).map(Term::Literal).map_err(|e| syntax(line, column, e.to_string()))
            }
            Some(Token { tok: Tok::Caret2, line, column }) => {
                self.pos += 1;
                let dt = match self.next() {
                    Some(Token { tok: Tok::Iri(i), .. }) => i,
                    Some(Token { tok: Tok::PName { prefix, local }, line, column }) => {
                        self.prefixes.expand(&prefix, &local).ok_or(RdfError::UnknownPrefix { prefix, line, column })?
                    }
                    _ => return Err(syntax(line, column, "expected datatype after '^^'")),
                };
                let dt = Iri::new(dt).map_err(|e| syntax(line, column, e.to_string()))?;
                Literal::typed(lexical, dt).map(Term::Literal).map_err(|e| syntax(line, column, e.to_string()))
            }
            _ => Ok(Term::Literal(Literal::simple(lexical))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position {
    Subject,
    Predicate,
    Object,
}

/// One result row: values for the projected variables, in SELECT order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Solution {
    pub bindings: Vec<(String, Term)>,
}

impl Solution {
    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.iter().find(|(v, _)| v == var).map(|(_, t)| t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResults {
    pub variables: Vec<String>,
    pub solutions: Vec<Solution>,
    /// Rows dropped because a filter compared incompatible values.
    pub type_warnings: usize,
}

impl QueryResults {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Tab-separated table with a header row of variable names.
    pub fn to_tsv(&self, prefixes: &PrefixMap) -> String {
        let mut out = self.variables.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for row in &self.solutions {
            let cells: Vec<String> = row.bindings.iter().map(|(_, t)| render_term(t, prefixes)).collect();
            writeln!(out, "{}", cells.join("\t")).unwrap();
        }
        out
    }
}

/// Outcome of a single filter on a single bound value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOutcome {
    Pass,
    Fail,
    TypeMismatch,
}

/// Filter semantics: numeric constants need numerically-coercible literals;
/// string constants compare lexical forms of plain literals, and any other
/// term is simply unequal to them.
pub fn apply_filter(filter: &FilterExpr, value: &Term) -> FilterOutcome {
    let verdict = |b: bool| if b { FilterOutcome::Pass } else { FilterOutcome::Fail };
    match &filter.constant {
        Constant::Number(n) => match value.as_literal().and_then(Literal::numeric_value) {
            Some(v) => match v.partial_cmp(n) {
                Some(ord) => verdict(filter.op.holds(ord)),
                None => FilterOutcome::TypeMismatch,
            },
            None => FilterOutcome::TypeMismatch,
        },
        Constant::Text(s) => match value.as_literal() {
            Some(lit) if lit.datatype().is_none() && lit.language().is_none() => {
                verdict(filter.op.holds(lit.lexical().cmp(s)))
            }
            _ if filter.op.is_equality() => verdict(filter.op == CompareOp::Ne),
            _ => FilterOutcome::TypeMismatch,
        },
    }
}

/// Sort order for ORDER BY: blank nodes, then IRIs (lexicographic), then
/// literals. Numeric literals compare by value and precede other literals.
pub fn order_terms(a: &Term, b: &Term) -> Ordering {
    fn rank(t: &Term) -> u8 {
        match t {
            Term::BlankNode(_) => 0,
            Term::Iri(_) => 1,
            Term::Literal(_) => 2,
        }
    }
    match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => match (x.numeric_value(), y.numeric_value()) {
            (Some(p), Some(q)) => p.partial_cmp(&q).unwrap_or(Ordering::Equal),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => x.lexical().cmp(y.lexical()).then_with(|| x.kind().cmp(y.kind())),
        },
        (Term::Iri(x), Term::Iri(y)) => x.as_str().cmp(y.as_str()),
        (Term::BlankNode(x), Term::BlankNode(y)) => x.cmp(y),
        _ => rank(a).cmp(&rank(b)),
    }
}

/// Evaluates a query with left-to-right nested-loop joins over the graph's
/// indexes, then filters, a stable ORDER BY, and LIMIT. Duplicates are kept.
pub fn evaluate(graph: &Graph, query: &Query) -> QueryResults {
    let slots: HashMap<&str, usize> = query.pattern_vars().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut rows: Vec<Vec<Option<Term>>> = vec![vec![None; slots.len()]];
    for pattern in &query.patterns {
        let mut next = Vec::new();
        for row in &rows {
            extend_row(graph, pattern, row, &slots, &mut next);
        }
        rows = next;
        if rows.is_empty() {
            break;
        }
    }

    let mut type_warnings = 0;
    rows.retain(|row| {
        query.filters.iter().all(|f| {
            let value = row[slots[f.variable.as_str()]].as_ref().expect("filter variables are bound by patterns");
            match apply_filter(f, value) {
                FilterOutcome::Pass => true,
                FilterOutcome::Fail => false,
                FilterOutcome::TypeMismatch => {
                    type_warnings += 1;
                    false
                }
            }
        })
    });

    if let Some(order) = &query.order_by {
        let slot = slots[order.variable.as_str()];
        rows.sort_by(|a, b| {
            let ord = order_terms(a[slot].as_ref().unwrap(), b[slot].as_ref().unwrap());
            if order.ascending {
                ord
            } else {
                ord.reverse()
            }
        });
    }
    if let Some(limit) = query.limit {
        rows.truncate(limit);
    }

    let solutions = rows
        .into_iter()
        .map(|row| Solution {
            bindings: query
                .select
                .iter()
                .map(|v| (v.clone(), row[slots[v.as_str()]].clone().expect("projected variables are bound")))
                .collect(),
        })
        .collect();
    QueryResults { variables: query.select.clone(), solutions, type_warnings }
}

fn extend_row(
    graph: &Graph,
    pattern: &TriplePattern,
    row: &[Option<Term>],
    slots: &HashMap<&str, usize>,
    out: &mut Vec<Vec<Option<Term>>>,
) {
    let resolve = |pt: &PatternTerm| -> Option<Term> {
        match pt {
            PatternTerm::Term(t) => Some(t.clone()),
            PatternTerm::Var(v) => row[slots[v.as_str()]].clone(),
        }
    };
    let s = resolve(&pattern.subject);
    let p = resolve(&pattern.predicate);
    let o = resolve(&pattern.object);
    if s.as_ref().is_some_and(Term::is_literal) {
        return;
    }
    let p_iri = match &p {
        Some(Term::Iri(iri)) => Some(iri),
        Some(_) => return,
        None => None,
    };
    for triple in graph.matching(s.as_ref(), p_iri, o.as_ref()) {
        let mut candidate = row.to_vec();
        let values = [
            (&pattern.subject, triple.subject().clone()),
            (&pattern.predicate, Term::Iri(triple.predicate().clone())),
            (&pattern.object, triple.object().clone()),
        ];
        let consistent = values.into_iter().all(|(pt, value)| match pt {
            PatternTerm::Term(_) => true,
            PatternTerm::Var(v) => {
                let slot = &mut candidate[slots[v.as_str()]];
                match slot {
                    Some(existing) => *existing == value,
                    None => {
                        *slot = Some(value);
                        true
                    }
                }
            }
        });
        if consistent {
            out.push(candidate);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turtle::parse_turtle;

    #[test]
    fn minimal_query() {
        let q = parse_query("SELECT ?x WHERE { ?x ?p ?o . }").unwrap();
        assert_eq!(q.patterns.len(), 1);
        assert!(q.filters.is_empty());
        assert_eq!(q.select, vec!["x"]);
    }

    #[test]
    fn unbound_select_variable() {
        assert_eq!(parse_query("SELECT ?y WHERE { ?x ?p ?o }"), Err(RdfError::UnboundSelectVariable("y".into())));
        assert!(matches!(
            parse_query("SELECT ?x WHERE { ?x ?p ?o FILTER(?z > 1) }"),
            Err(RdfError::UnboundVariable { .. })
        ));
    }

    #[test]
    fn unknown_prefix_and_syntax_positions() {
        assert!(matches!(
            parse_query("SELECT ?x WHERE { ?x ex:p ?o }"),
            Err(RdfError::UnknownPrefix { ref prefix, line: 1, column: 22 }) if prefix == "ex"
        ));
        assert!(matches!(parse_query("SELECT ?x WHERE { ?x ?p ?o "), Err(RdfError::Syntax { .. })));
        assert!(matches!(parse_query("SELECT ?x WHERE { ?x ?p ?o } LIMIT 0"), Err(RdfError::Syntax { .. })));
        assert!(matches!(parse_query("SELECT ?x WHERE { OPTIONAL { ?x ?p ?o } }"), Err(RdfError::Syntax { .. })));
    }

    #[test]
    fn filter_on_unknown_value_is_counted_not_fatal() {
        let (g, _) = parse_turtle(
            r#"@prefix ex: <http://e/> . @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
               ex:a ex:eff 35 . ex:b ex:eff "unknown"^^xsd:decimal . ex:c ex:eff "n/a" ."#,
            None,
        )
        .unwrap();
        let q = parse_query("PREFIX ex: <http://e/> SELECT ?m WHERE { ?m ex:eff ?e FILTER(?e > 30) }").unwrap();
        let r = evaluate(&g, &q);
        assert_eq!(r.len(), 1);
        assert_eq!(r.type_warnings, 2);
    }

    #[test]
    fn order_desc_and_limit() {
        let (g, _) =
            parse_turtle("@prefix ex: <http://e/> . ex:a ex:v 2 . ex:b ex:v 10 . ex:c ex:v 7 .", None).unwrap();
        let q = parse_query("PREFIX ex: <http://e/> SELECT ?s ?v { ?s ex:v ?v } ORDER BY DESC(?v) LIMIT 2").unwrap();
        let r = evaluate(&g, &q);
        let vals: Vec<String> =
            r.solutions.iter().map(|s| s.get("v").unwrap().as_literal().unwrap().lexical().to_string()).collect();
        assert_eq!(vals, vec!["10", "7"]);
        assert_eq!(r.to_tsv(&q.prefixes), "?s\t?v\nex:b\t10\nex:c\t7\n");
    }

    #[test]
    fn repeated_variable_in_pattern() {
        let (g, _) = parse_turtle("@prefix ex: <http://e/> . ex:a ex:p ex:a . ex:a ex:p ex:b .", None).unwrap();
        let q = parse_query("SELECT ?x { ?x ?p ?x }").unwrap();
        assert_eq!(evaluate(&g, &q).len(), 1);
    }

    #[test]
    fn string_constant_filters() {
        let lit = Term::Literal(Literal::simple("family"));
        let f = |op, s: &str| FilterExpr { variable: "x".into(), op, constant: Constant::Text(s.into()) };
        assert_eq!(apply_filter(&f(CompareOp::Eq, "family"), &lit), FilterOutcome::Pass);
        assert_eq!(apply_filter(&f(CompareOp::Lt, "zzz"), &lit), FilterOutcome::Pass);
        let iri = Term::iri("http://e/family").unwrap();
        assert_eq!(apply_filter(&f(CompareOp::Ne, "family"), &iri), FilterOutcome::Pass);
        assert_eq!(apply_filter(&f(CompareOp::Gt, "family"), &iri), FilterOutcome::TypeMismatch);
    }
}
