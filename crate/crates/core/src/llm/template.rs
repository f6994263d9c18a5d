//! Prompt templates for the seven prompting techniques.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::proposal::{format_instructions, ProposalKind};
use super::{LlmError, Message};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Technique {
    ZeroShot,
    FewShot,
    ChainOfThought,
    SelfConsistency,
    GeneralKnowledge,
    PromptChaining,
    RetrievalAugmented,
}

/// Reserved slot carrying the previous chain step's completion.
pub const PREVIOUS_SLOT: &str = "previous";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    pub technique: Technique,
    /// Instruction text with `{slot}` placeholders; `{{` and `}}` are literal braces.
    /// Ignored for PromptChaining, whose steps carry the text.
    #[serde(default)]
    pub body: String,
    pub slots: Vec<String>,
    pub expected_kinds: Vec<ProposalKind>,
    #[serde(default)]
    pub exemplars: Vec<String>,
    #[serde(default)]
    pub steps: Vec<String>,
    /// Reasoning steps appended by ChainOfThought.
    #[serde(default)]
    pub scaffold: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excerpt {
    pub source: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenderContext {
    pub slots: BTreeMap<String, String>,
    /// Background fact block for GeneralKnowledge.
    pub facts: Option<String>,
    /// Retrieved excerpts for RetrievalAugmented, in rank order.
    pub retrieved: Vec<Excerpt>,
}

impl RenderContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn slot(mut self, name: &str, value: impl Into<String>) -> Self {
        self.slots.insert(name.to_string(), value.into());
        self
    }
}

enum Piece<'a> {
    Text(&'a str),
    Brace(char),
    Slot(&'a str),
}

fn pieces(text: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let (mut i, mut start) = (0, 0);
    while i < bytes.len() {
        let escaped = matches!(bytes[i], b'{' | b'}') && bytes.get(i + 1) == Some(&bytes[i]);
        if escaped {
            out.push(Piece::Text(&text[start..i]));
            out.push(Piece::Brace(bytes[i] as char));
            i += 2;
            start = i;
            continue;
        }
        if bytes[i] == b'{' {
            let rest = &text[i + 1..];
            if let Some(end) = rest.find('}') {
                let name = &rest[..end];
                if is_slot_name(name) {
                    out.push(Piece::Text(&text[start..i]));
                    out.push(Piece::Slot(name));
                    i += end + 2;
                    start = i;
                    continue;
                }
            }
        }
        i += 1;
    }
    out.push(Piece::Text(&text[start..]));
    out
}

fn is_slot_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Slot names referenced by `text`, in first-occurrence order.
pub fn referenced_slots(text: &str) -> Vec<String> {
    let mut seen = Vec::new();
    for p in pieces(text) {
        if let Piece::Slot(name) = p {
            if !seen.iter().any(|s| s == name) {
                seen.push(name.to_string());
            }
        }
    }
    seen
}

fn substitute(text: &str, values: &BTreeMap<String, String>) -> String {
    let mut out = String::with_capacity(text.len());
    for p in pieces(text) {
        match p {
            Piece::Text(t) => out.push_str(t),
            Piece::Brace(c) => out.push(c),
            Piece::Slot(name) => out.push_str(values.get(name).map(String::as_str).unwrap_or("")),
        }
    }
    out
}

impl PromptTemplate {
    pub fn validate(&self) -> Result<(), LlmError> {
        let declared: BTreeSet<&str> = self.slots.iter().map(String::as_str).collect();
        let texts: Vec<&str> = if self.technique == Technique::PromptChaining {
            self.steps.iter().map(String::as_str).collect()
        } else {
            vec![self.body.as_str()]
        };
        for text in texts {
            for slot in referenced_slots(text) {
                if slot != PREVIOUS_SLOT && !declared.contains(slot.as_str()) {
                    return Err(LlmError::InvalidTemplate(format!("{}: undeclared slot {{{slot}}}", self.id)));
                }
            }
        }
        if declared.contains(PREVIOUS_SLOT) {
            return Err(LlmError::InvalidTemplate(format!("{}: slot '{PREVIOUS_SLOT}' is reserved", self.id)));
        }
        match self.technique {
            Technique::FewShot if self.exemplars.is_empty() => {
                Err(LlmError::InvalidTemplate(format!("{}: FewShot needs at least one exemplar", self.id)))
            }
            Technique::PromptChaining if self.steps.len() < 2 => {
                Err(LlmError::InvalidTemplate(format!("{}: PromptChaining needs at least two steps", self.id)))
            }
            _ => Ok(()),
        }
    }

    fn check_slots(&self, ctx: &RenderContext) -> Result<(), LlmError> {
        let missing: Vec<String> = self.slots.iter().filter(|s| !ctx.slots.contains_key(*s)).cloned().collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(LlmError::MissingSlot(missing))
        }
    }

    /// Renders chain step `step` (0-based). Steps after the first receive the
    /// previous completion through the reserved slot, or as a trailing section
    /// when the step text does not reference it.
    pub fn render_step(&self, step: usize, ctx: &RenderContext, previous: Option<&str>) -> Result<String, LlmError> {
        self.validate()?;
        self.check_slots(ctx)?;
        let text = self
            .steps
            .get(step)
            .ok_or_else(|| LlmError::InvalidTemplate(format!("{}: no step {}", self.id, step + 1)))?;
        let mut values = ctx.slots.clone();
        let prev = previous.unwrap_or("");
        values.insert(PREVIOUS_SLOT.to_string(), prev.to_string());
        let mut out = substitute(text, &values);
        if step > 0 && !referenced_slots(text).iter().any(|s| s == PREVIOUS_SLOT) {
            out.push_str("\n\nPrevious step output:\n");
            out.push_str(prev);
        }
        Ok(out)
    }

    /// System and user messages for a single request.
    pub fn messages(&self, ctx: &RenderContext) -> Result<Vec<Message>, LlmError> {
        Ok(vec![Message::system(format_instructions(&self.expected_kinds)), Message::user(render_prompt(self, ctx)?)])
    }
}

/// Pure function of template and context; chaining templates render their first step.
pub fn render_prompt(template: &PromptTemplate, ctx: &RenderContext) -> Result<String, LlmError> {
    template.validate()?;
    if template.technique == Technique::PromptChaining {
        return template.render_step(0, ctx, None);
    }
    template.check_slots(ctx)?;
    let body = substitute(&template.body, &ctx.slots);
    let out = match template.technique {
        Technique::FewShot => {
            let mut s = String::from("Examples:\n");
            for ex in &template.exemplars {
                s.push_str(ex);
                s.push('\n');
            }
            s.push('\n');
            s.push_str(&body);
            s
        }
        Technique::GeneralKnowledge => {
            let facts = ctx.facts.as_deref().ok_or_else(|| LlmError::MissingSlot(vec!["facts".into()]))?;
            format!("Background facts:\n{facts}\n\n{body}")
        }
        Technique::ChainOfThought => {
            let mut s = body;
            s.push_str("\n\nReason step by step before answering:\n");
            for (i, step) in template.scaffold.iter().enumerate() {
                s.push_str(&format!("{}. {}\n", i + 1, step));
            }
            s
        }
        Technique::RetrievalAugmented => {
            let mut s = body;
            s.push_str("\n\nRetrieved excerpts:\n");
            for ex in &ctx.retrieved {
                s.push_str(&format!("[{}] {}\n", ex.source, ex.text));
            }
            s
        }
        Technique::ZeroShot | Technique::SelfConsistency | Technique::PromptChaining => body,
    };
    Ok(out)
}

/// Template ids used by the pipeline stages.
pub mod ids {
    pub const GLOSSARY: &str = "scenario-glossary";
    pub const COMPETENCY_QUESTIONS: &str = "competency-questions";
    pub const MODELET: &str = "modelet";
    pub const TEST_QUERY: &str = "test-query";
    pub const TEST_INSTANCES: &str = "test-instances";
    pub const REFINEMENT: &str = "refinement";
    pub const ANNOTATION: &str = "annotation";
    pub const FEEDBACK_SUMMARY: &str = "feedback-summary";
    pub const FEEDBACK_PROPOSALS: &str = "feedback-proposals";
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateLibrary {
    templates: BTreeMap<String, PromptTemplate>,
}

impl TemplateLibrary {
    pub fn builtin() -> Self {
        let templates = builtin_templates().into_iter().map(|t| (t.id.clone(), t)).collect();
        TemplateLibrary { templates }
    }

    /// Replaces built-ins with any `<id>.json` found in `dir`.
    pub fn with_overrides(mut self, dir: &Path) -> Result<Self, LlmError> {
        if !dir.is_dir() {
            return Ok(self);
        }
        let mut entries: Vec<_> = fs::read_dir(dir)
            .map_err(|e| LlmError::InvalidTemplate(format!("{}: {e}", dir.display())))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        entries.sort();
        for path in entries {
            let text =
                fs::read_to_string(&path).map_err(|e| LlmError::InvalidTemplate(format!("{}: {e}", path.display())))?;
            let t: PromptTemplate = serde_json::from_str(&text)
                .map_err(|e| LlmError::InvalidTemplate(format!("{}: {e}", path.display())))?;
            t.validate()?;
            self.templates.insert(t.id.clone(), t);
        }
        Ok(self)
    }

    pub fn get(&self, id: &str) -> Result<&PromptTemplate, LlmError> {
        self.templates.get(id).ok_or_else(|| LlmError::InvalidTemplate(format!("unknown template '{id}'")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.values()
    }
}

fn builtin_templates() -> Vec<PromptTemplate> {
    use ProposalKind::*;
    let t = |id: &str, technique, body: &str, slots: &[&str], kinds: Vec<ProposalKind>| PromptTemplate {
        id: id.into(),
        technique,
        body: body.into(),
        slots: slots.iter().map(|s| s.to_string()).collect(),
        expected_kinds: kinds,
        exemplars: vec![],
        steps: vec![],
        scaffold: vec![],
    };
    let mut cq = t(
        ids::COMPETENCY_QUESTIONS,
        Technique::FewShot,
        "Write competency questions that an ontology for {domain} must answer, grounded in the scenario and glossary.\n\nScenario:\n{scenario}\n\nGlossary:\n{glossary}",
        &["domain", "scenario", "glossary"],
        vec![CompetencyQuestion],
    );
    cq.exemplars = vec![
        "Vehicle hasEngine Engine".into(),
        "Car isA Vehicle".into(),
        "Which vehicles match the preferences a user expresses in a given context?".into(),
    ];
    let mut query = t(
        ids::TEST_QUERY,
        Technique::ChainOfThought,
        "Translate competency question {cq_id} into one SPARQL SELECT query over the vocabulary below and state the expected result.\n\nQuestion: {question}\n\nVocabulary:\n{vocabulary}",
        &["cq_id", "question", "vocabulary"],
        vec![SparqlTest],
    );
    query.scaffold = vec![
        "Identify the classes the question refers to.".into(),
        "Identify the properties that connect them.".into(),
        "Write the triple patterns and any FILTER conditions.".into(),
        "Choose the expectation the answer must satisfy.".into(),
    ];
    let mut chain = t(
        ids::FEEDBACK_PROPOSALS,
        Technique::PromptChaining,
        "",
        &["themes", "ontology"],
        vec![ClassDef, ObjectPropertyDef, DataPropertyDef, RelationAxiom, Annotation],
    );
    chain.steps = vec![
        "For each accepted feedback theme, describe the ontology change it calls for.\n\nThemes:\n{themes}\n\nCurrent ontology:\n{ontology}".into(),
        "Turn the changes described below into concrete ontology proposals.\n\nPrevious step output:\n{previous}".into(),
    ];
    vec![
        t(
            ids::GLOSSARY,
            Technique::RetrievalAugmented,
            "List the key terms of the {domain} domain that appear in the scenario, each with its interpretation in this scenario.\n\nScenario:\n{scenario}",
            &["domain", "scenario"],
            vec![GlossaryTerm],
        ),
        cq,
        t(
            ids::MODELET,
            Technique::SelfConsistency,
            "Propose classes, object properties, data properties and relations that model these competency questions.\n\nCompetency questions:\n{questions}\n\nGlossary:\n{glossary}\n\nExisting ontology:\n{ontology}",
            &["questions", "glossary", "ontology"],
            vec![ClassDef, ObjectPropertyDef, DataPropertyDef, RelationAxiom],
        ),
        query,
        t(
            ids::TEST_INSTANCES,
            Technique::ZeroShot,
            "Create individuals, with facts, that populate the ontology so each competency question below has answers.\n\nCompetency questions:\n{questions}\n\nVocabulary:\n{vocabulary}",
            &["questions", "vocabulary"],
            vec![Instance],
        ),
        t(
            ids::REFINEMENT,
            Technique::GeneralKnowledge,
            "Suggest refinements to the ontology below that address the findings listed in the background facts.\n\nOntology:\n{ontology}",
            &["ontology"],
            vec![ClassDef, ObjectPropertyDef, DataPropertyDef, RelationAxiom, Annotation, Revision],
        ),
        t(
            ids::ANNOTATION,
            Technique::ZeroShot,
            "Write a human-readable label and a one-sentence comment for the {entity_kind} {entity}.\n\nContext:\n{context}",
            &["entity", "entity_kind", "context"],
            vec![Annotation],
        ),
        t(
            ids::FEEDBACK_SUMMARY,
            Technique::ZeroShot,
            "Group these feedback items into themes. For each theme give a summary, the supporting item ids, the overall sentiment, one representative quote, a suggested action and a rank, 1 being most important.\n\nItems:\n{items}",
            &["items"],
            vec![Revision],
        ),
        chain,
    ]
}
