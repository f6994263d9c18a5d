//! RDF terms and triples.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::vocab::{rdf, xsd};
use crate::RdfError;

/// An absolute (or base-resolved) IRI. Never empty, never contains whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, RdfError> {
        let value = value.into();
        if value.is_empty() {
            return Err(RdfError::InvalidIri { iri: value, reason: "empty IRI" });
        }
        if value.chars().any(char::is_whitespace) {
            return Err(RdfError::InvalidIri { iri: value, reason: "IRI contains whitespace" });
        }
        Ok(Iri(value))
    }

    /// Builds an IRI from a compile-time constant. Panics on invalid input.
    pub fn from_static(value: &'static str) -> Self {
        Iri::new(value).expect("static IRI must be valid")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The fragment or last path segment, used for display and fallback labels.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        let cut = s.rfind(['#', '/', ':']).map(|i| i + 1).unwrap_or(0);
        if cut >= s.len() {
            s
        } else {
            &s[cut..]
        }
    }
}

impl TryFrom<String> for Iri {
    type Error = RdfError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// How a literal is qualified. A language-tagged literal never carries a datatype.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LiteralKind {
    /// Plain string, equivalent to `xsd:string`.
    Simple,
    Typed(Iri),
    Lang(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    kind: LiteralKind,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), kind: LiteralKind::Simple }
    }

    /// `xsd:string` collapses to a simple literal and `rdf:langString` without a tag is rejected.
    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Result<Self, RdfError> {
        let lexical = lexical.into();
        if datatype.as_str() == xsd::STRING {
            return Ok(Literal::simple(lexical));
        }
        if datatype.as_str() == rdf::LANG_STRING {
            return Err(RdfError::InvalidLiteral { lexical, reason: "rdf:langString requires a language tag" });
        }
        Ok(Literal { lexical, kind: LiteralKind::Typed(datatype) })
    }

    pub fn lang(lexical: impl Into<String>, tag: impl Into<String>) -> Result<Self, RdfError> {
        let lexical = lexical.into();
        let tag = tag.into();
        let valid = !tag.is_empty()
            && tag.split('-').all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric()))
            && tag.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        if !valid {
            return Err(RdfError::InvalidLiteral { lexical, reason: "malformed language tag" });
        }
        Ok(Literal { lexical, kind: LiteralKind::Lang(tag.to_ascii_lowercase()) })
    }

    pub fn integer(value: i64) -> Self {
        Literal { lexical: value.to_string(), kind: LiteralKind::Typed(Iri::from_static(xsd::INTEGER)) }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn kind(&self) -> &LiteralKind {
        &self.kind
    }

    pub fn datatype(&self) -> Option<&Iri> {
        match &self.kind {
            LiteralKind::Typed(dt) => Some(dt),
            _ => None,
        }
    }

    pub fn language(&self) -> Option<&str> {
        match &self.kind {
            LiteralKind::Lang(tag) => Some(tag),
            _ => None,
        }
    }

    /// Numeric value for xsd:integer / xsd:decimal (and their common relatives).
    /// Returns `None` for anything whose lexical form does not coerce.
    pub fn numeric_value(&self) -> Option<f64> {
        let dt = self.datatype()?;
        if !xsd::is_numeric(dt.as_str()) {
            return None;
        }
        parse_decimal(&self.lexical)
    }
}

/// Parses an xsd:integer / xsd:decimal lexical form (optional sign, digits, optional fraction).
pub fn parse_decimal(lexical: &str) -> Option<f64> {
    let body = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    let ok = match frac {
        Some(f) => digits(int) && digits(f) && !(int.is_empty() && f.is_empty()) && !f.is_empty(),
        None => !int.is_empty() && digits(int),
    };
    if !ok {
        return None;
    }
    lexical.parse::<f64>().ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Iri(Iri),
    BlankNode(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, RdfError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::BlankNode(label.into())
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    /// N-Triples rendering; also the canonical sort key for serialization.
    pub fn to_ntriples(&self) -> String {
        self.to_string()
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "{iri}"),
            Term::BlankNode(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => {
                write!(f, "\"{}\"", escape_string(&lit.lexical))?;
                match &lit.kind {
                    LiteralKind::Simple => Ok(()),
                    LiteralKind::Typed(dt) => write!(f, "^^{dt}"),
                    LiteralKind::Lang(tag) => write!(f, "@{tag}"),
                }
            }
        }
    }
}

/// A triple whose subject is never a literal and whose predicate is always an IRI.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Self, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::LiteralSubject(subject.to_string()));
        }
        Ok(Triple { subject, predicate, object })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Iri, Term) {
        (self.subject, self.predicate, self.object)
    }

    /// Ordering used by the serializer: subject, predicate, then object in canonical form.
    pub fn canonical_cmp(&self, other: &Triple) -> Ordering {
        self.subject
            .to_ntriples()
            .cmp(&other.subject.to_ntriples())
            .then_with(|| self.predicate.as_str().cmp(other.predicate.as_str()))
            .then_with(|| self.object.to_ntriples().cmp(&other.object.to_ntriples()))
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
