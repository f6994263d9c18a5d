//! Turtle subset reader and writer.
//!
//! Supported: `@prefix`/`PREFIX`, `@base`/`BASE`, `a`, predicate-object lists
//! with `;`, object lists with `,`, IRIs, prefixed names, labelled blank nodes,
//! single-line strings with escapes, `^^` datatypes, `@lang` tags, and bare
//! integer/decimal/boolean tokens. Collections, `[]` and long strings are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::graph::Graph;
use crate::lex::{syntax, Lexer, Tok, Token};
use crate::prefix::{is_valid_label, PrefixMap};
use crate::term::{escape_string, Iri, Literal, Term, Triple};
use crate::vocab::{rdf, xsd};
use crate::RdfError;

/// Parses a Turtle document. Relative IRIs are resolved against `base` (or
/// an in-document `@base`) when one is given.
pub fn parse_turtle(input: &str, base: Option<&str>) -> Result<(Graph, PrefixMap), RdfError> {
    let tokens = Lexer::new(input).tokenize()?;
    let eof = end_position(input);
    let mut parser = TurtleParser {
        tokens,
        pos: 0,
        eof,
        prefixes: PrefixMap::new(),
        base: base.map(str::to_owned),
        graph: Graph::new(),
    };
    parser.document()?;
    Ok((parser.graph, parser.prefixes))
}

/// Line and column just past the last character.
pub(crate) fn end_position(input: &str) -> (usize, usize) {
    input.chars().fold((1, 1), |(l, c), ch| if ch == '\n' { (l + 1, 1) } else { (l, c + 1) })
}

pub(crate) fn has_scheme(iri: &str) -> bool {
    let mut chars = iri.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    for c in chars {
        if c == ':' {
            return true;
        }
        if !(c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.')) {
            return false;
        }
    }
    false
}

/// Minimal reference resolution: fragment, absolute-path and relative-path forms.
pub(crate) fn resolve(base: &str, reference: &str) -> String {
    if has_scheme(reference) {
        return reference.to_string();
    }
    let without_fragment = base.split('#').next().unwrap_or(base);
    if reference.is_empty() {
        return without_fragment.to_string();
    }
    if reference.starts_with('#') {
        return format!("{without_fragment}{reference}");
    }
    if reference.starts_with('/') {
        if let Some(scheme_end) = base.find("://") {
            let rest = &base[scheme_end + 3..];
            let authority_end = rest.find('/').map(|i| scheme_end + 3 + i).unwrap_or(base.len());
            return format!("{}{reference}", &base[..authority_end]);
        }
        return reference.to_string();
    }
    match without_fragment.rfind('/') {
        Some(i) => format!("{}{reference}", &without_fragment[..=i]),
        None => format!("{without_fragment}{reference}"),
    }
}

struct TurtleParser {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
    prefixes: PrefixMap,
    base: Option<String>,
    graph: Graph,
}

impl TurtleParser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, reason: impl Into<String>) -> RdfError {
        match self.peek() {
            Some(t) => syntax(t.line, t.column, reason),
            None => syntax(self.eof.0, self.eof.1, reason),
        }
    }

    fn expect_dot(&mut self, after: &str) -> Result<(), RdfError> {
        match self.peek() {
            Some(Token { tok: Tok::Dot, .. }) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(syntax(t.line, t.column, format!("expected '.' after {after}, found {}", t.tok.describe()))),
            None => Err(self.err_here(format!("expected '.' after {after}, found end of input"))),
        }
    }

    fn document(&mut self) -> Result<(), RdfError> {
        while let Some(token) = self.peek().cloned() {
            match &token.tok {
                Tok::At(word) if word == "prefix" => {
                    self.pos += 1;
                    self.prefix_directive()?;
                    self.expect_dot("@prefix directive")?;
                }
                Tok::At(word) if word == "base" => {
                    self.pos += 1;
                    self.base_directive()?;
                    self.expect_dot("@base directive")?;
                }
                Tok::Word(word) if word.eq_ignore_ascii_case("prefix") => {
                    self.pos += 1;
                    self.prefix_directive()?;
                }
                Tok::Word(word) if word.eq_ignore_ascii_case("base") => {
                    self.pos += 1;
                    self.base_directive()?;
                }
                _ => self.triples()?,
            }
        }
        Ok(())
    }

    fn prefix_directive(&mut self) -> Result<(), RdfError> {
        let label = match self.next() {
            Some(Token { tok: Tok::PName { prefix, local }, line, column }) => {
                if !local.is_empty() {
                    return Err(syntax(line, column, "prefix label must end with ':'"));
                }
                if !is_valid_label(&prefix) {
                    return Err(syntax(line, column, format!("invalid prefix label '{prefix}'")));
                }
                prefix
            }
            Some(t) => {
                return Err(syntax(t.line, t.column, format!("expected prefix label, found {}", t.tok.describe())))
            }
            None => return Err(self.err_here("expected prefix label, found end of input")),
        };
        let ns = self.iri_ref("namespace IRI")?;
        self.prefixes.insert(label, ns);
        Ok(())
    }

    fn base_directive(&mut self) -> Result<(), RdfError> {
        let iri = self.iri_ref("base IRI")?;
        self.base = Some(iri);
        Ok(())
    }

    fn iri_ref(&mut self, what: &str) -> Result<String, RdfError> {
        match self.next() {
            Some(Token { tok: Tok::Iri(iri), line, column }) => {
                let resolved = self.resolve(&iri);
                Iri::new(resolved.clone()).map_err(|e| syntax(line, column, e.to_string()))?;
                Ok(resolved)
            }
            Some(t) => Err(syntax(t.line, t.column, format!("expected {what}, found {}", t.tok.describe()))),
            None => Err(self.err_here(format!("expected {what}, found end of input"))),
        }
    }

    fn resolve(&self, iri: &str) -> String {
        match &self.base {
            Some(base) if !has_scheme(iri) => resolve(base, iri),
            _ => iri.to_string(),
        }
    }

    fn make_iri(&self, raw: &str, line: usize, column: usize) -> Result<Iri, RdfError> {
        Iri::new(self.resolve(raw)).map_err(|e| syntax(line, column, e.to_string()))
    }

    fn expand(&self, prefix: &str, local: &str, line: usize, column: usize) -> Result<Iri, RdfError> {
        let expanded = self.prefixes.expand(prefix, local).ok_or_else(|| RdfError::UnknownPrefix {
            prefix: prefix.to_string(),
            line,
            column,
        })?;
        Iri::new(expanded).map_err(|e| syntax(line, column, e.to_string()))
    }

    fn triples(&mut self) -> Result<(), RdfError> {
        let subject = self.subject()?;
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.object()?;
                let triple = Triple::new(subject.clone(), predicate.clone(), object)
                    .expect("subject position never yields a literal");
                self.graph.insert(triple);
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => {
                        self.pos += 1;
                    }
                    _ => break,
                }
            }
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Semicolon) => {
                    while matches!(self.peek().map(|t| &t.tok), Some(Tok::Semicolon)) {
                        self.pos += 1;
                    }
                    if matches!(self.peek().map(|t| &t.tok), Some(Tok::Dot)) {
                        break;
                    }
                }
                _ => break,
            }
        }
        self.expect_dot("triples")
    }

    fn subject(&mut self) -> Result<Term, RdfError> {
        let t = self.next().expect("caller checked a token is present");
        match t.tok {
            Tok::Iri(raw) => Ok(Term::Iri(self.make_iri(&raw, t.line, t.column)?)),
            Tok::PName { prefix, local } => Ok(Term::Iri(self.expand(&prefix, &local, t.line, t.column)?)),
            Tok::Blank(label) => Ok(Term::BlankNode(label)),
            Tok::LBracket => Err(syntax(t.line, t.column, "anonymous blank nodes '[]' are not supported")),
            Tok::LParen => Err(syntax(t.line, t.column, "collections are not supported")),
            Tok::Str(_) | Tok::Integer(_) | Tok::Decimal(_) => {
                Err(syntax(t.line, t.column, "a literal cannot be a subject"))
            }
            other => Err(syntax(t.line, t.column, format!("expected subject, found {}", other.describe()))),
        }
    }

    fn predicate(&mut self) -> Result<Iri, RdfError> {
        let Some(t) = self.next() else {
            return Err(self.err_here("expected predicate, found end of input"));
        };
        match t.tok {
            Tok::Iri(raw) => self.make_iri(&raw, t.line, t.column),
            Tok::PName { prefix, local } => self.expand(&prefix, &local, t.line, t.column),
            Tok::Word(w) if w == "a" => Ok(Iri::from_static(rdf::TYPE)),
            other => Err(syntax(t.line, t.column, format!("expected predicate, found {}", other.describe()))),
        }
    }

    fn object(&mut self) -> Result<Term, RdfError> {
        let Some(t) = self.next() else {
            return Err(self.err_here("expected object, found end of input"));
        };
        match t.tok {
            Tok::Iri(raw) => Ok(Term::Iri(self.make_iri(&raw, t.line, t.column)?)),
            Tok::PName { prefix, local } => Ok(Term::Iri(self.expand(&prefix, &local, t.line, t.column)?)),
            Tok::Blank(label) => Ok(Term::BlankNode(label)),
            Tok::Str(lexical) => self.literal_tail(lexical),
            Tok::Integer(n) => Ok(Term::Literal(Literal::typed(n, Iri::from_static(xsd::INTEGER)).unwrap())),
            Tok::Decimal(n) => Ok(Term::Literal(Literal::typed(n, Iri::from_static(xsd::DECIMAL)).unwrap())),
            Tok::Word(w) if w == "true" || w == "false" => {
                Ok(Term::Literal(Literal::typed(w, Iri::from_static(xsd::BOOLEAN)).unwrap()))
            }
            Tok::LBracket => Err(syntax(t.line, t.column, "anonymous blank nodes '[]' are not supported")),
            Tok::LParen => Err(syntax(t.line, t.column, "collections are not supported")),
            other => Err(syntax(t.line, t.column, format!("expected object, found {}", other.describe()))),
        }
    }

    fn literal_tail(&mut self, lexical: String) -> Result<Term, RdfError> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::At(tag), line, column }) => {
                self.pos += 1;
                Literal::lang(lexical, tag).map(Term::Literal).map_err(|e| syntax(line, column, e.to_string()))
            }
            Some(Token { tok: Tok::Caret2, line, column }) => {
                self.pos += 1;
                let dt = match self.next() {
                    Some(Token { tok: Tok::Iri(raw), line, column }) => self.make_iri(&raw, line, column)?,
                    Some(Token { tok: Tok::PName { prefix, local }, line, column }) => {
                        self.expand(&prefix, &local, line, column)?
                    }
                    _ => return Err(syntax(line, column, "expected datatype IRI after '^^'")),
                };
                Literal::typed(lexical, dt).map(Term::Literal).map_err(|e| syntax(line, column, e.to_string()))
            }
            _ => Ok(Term::Literal(Literal::simple(lexical))),
        }
    }
}

fn bare_numeric(lit: &Literal) -> Option<&str> {
    let dt = lit.datatype()?.as_str();
    let lex = lit.lexical();
    let body = lex.strip_prefix(['+', '-']).unwrap_or(lex);
    let digits = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_digit());
    let ok = match dt {
        xsd::INTEGER => digits(body),
        xsd::DECIMAL => match body.split_once('.') {
            Some((i, f)) => (i.is_empty() || digits(i)) && digits(f),
            None => false,
        },
        xsd::BOOLEAN => lex == "true" || lex == "false",
        _ => false,
    };
    ok.then_some(lex)
}

/// Writes `term` using prefixed names where `prefixes` allows.
pub fn render_term(term: &Term, prefixes: &PrefixMap) -> String {
    match term {
        Term::Iri(iri) => render_iri(iri, prefixes),
        Term::BlankNode(label) => format!("_:{label}"),
        Term::Literal(lit) => {
            if let Some(bare) = bare_numeric(lit) {
                return bare.to_string();
            }
            let mut s = format!("\"{}\"", escape_string(lit.lexical()));
            if let Some(tag) = lit.language() {
                write!(s, "@{tag}").unwrap();
            } else if let Some(dt) = lit.datatype() {
                write!(s, "^^{}", render_iri(dt, prefixes)).unwrap();
            }
            s
        }
    }
}

fn render_iri(iri: &Iri, prefixes: &PrefixMap) -> String {
    prefixes.compact(iri.as_str()).unwrap_or_else(|| format!("<{}>", iri.as_str()))
}

/// Serializes a graph as Turtle. Output is deterministic: subjects, then
/// predicates, then objects are sorted by canonical form.
pub fn serialize_turtle(graph: &Graph, prefixes: &PrefixMap) -> String {
    let mut usable = PrefixMap::new();
    for (label, ns) in prefixes.iter() {
        if is_valid_label(label) && Iri::new(ns).is_ok() {
            usable.insert(label, ns);
        }
    }
    let mut out = String::new();
    for (label, ns) in usable.iter() {
        writeln!(out, "@prefix {label}: <{ns}> .").unwrap();
    }

    let mut by_subject: BTreeMap<String, (&Term, BTreeMap<&str, Vec<&Term>>)> = BTreeMap::new();
    for t in graph {
        let entry = by_subject.entry(t.subject().to_ntriples()).or_insert_with(|| (t.subject(), BTreeMap::new()));
        entry.1.entry(t.predicate().as_str()).or_default().push(t.object());
    }
    for (_, (subject, predicates)) in by_subject {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&render_term(subject, &usable));
        let count = predicates.len();
        for (i, (predicate, mut objects)) in predicates.into_iter().enumerate() {
            objects.sort_by_cached_key(|o| o.to_ntriples());
            let pred = if predicate == rdf::TYPE {
                "a".to_string()
            } else {
                render_iri(&Iri::new(predicate).expect("graph IRIs are valid"), &usable)
            };
            if i == 0 {
                write!(out, " {pred} ").unwrap();
            } else {
                write!(out, "    {pred} ").unwrap();
            }
            let rendered: Vec<String> = objects.iter().map(|o| render_term(o, &usable)).collect();
            out.push_str(&rendered.join(" , "));
            out.push_str(if i + 1 == count { " .\n" } else { " ;\n" });
        }
    }
    out
}

/// One N-Triples line per triple, in canonical order.
pub fn to_ntriples(graph: &Graph) -> Vec<String> {
    let mut lines: Vec<String> = graph.iter().map(|t| t.to_string()).collect();
    lines.sort();
    lines
}
