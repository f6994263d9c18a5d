//! RDF terms, an indexed in-memory graph, a Turtle subset reader and
//! deterministic writer, blank-node-aware graph comparison, and a small
//! SPARQL SELECT evaluator.

mod lex;

pub mod graph;
pub mod iso;
pub mod prefix;
pub mod sparql;
pub mod term;
pub mod turtle;
pub mod vocab;

pub use graph::Graph;
pub use iso::graphs_equal;
pub use prefix::PrefixMap;
pub use sparql::{evaluate, parse_query, Query, QueryResults};
pub use term::{Iri, Literal, LiteralKind, Term, Triple};
pub use turtle::{parse_turtle, render_term, serialize_turtle, to_ntriples};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RdfError {
    #[error("syntax error at line {line}, column {column}: {reason}")]
    Syntax { line: usize, column: usize, reason: String },
    #[error("unknown prefix '{prefix}:' at line {line}, column {column}")]
    UnknownPrefix { prefix: String, line: usize, column: usize },
    #[error("invalid IRI <{iri}>: {reason}")]
    InvalidIri { iri: String, reason: &'static str },
    #[error("invalid literal \"{lexical}\": {reason}")]
    InvalidLiteral { lexical: String, reason: &'static str },
    #[error("literal {0} cannot be a subject")]
    LiteralSubject(String),
    #[error("variable ?{0} is selected but never bound by a pattern")]
    UnboundSelectVariable(String),
    #[error("variable ?{name} in {clause} is never bound by a pattern")]
    UnboundVariable { name: String, clause: &'static str },
}

impl RdfError {
    /// Source position, for errors that carry one.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            RdfError::Syntax { line, column, .. } | RdfError::UnknownPrefix { line, column, .. } => {
                Some((*line, *column))
            }
            _ => None,
        }
    }
}
