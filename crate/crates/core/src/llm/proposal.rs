//! Structured proposals extracted from model output.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::template::Technique;
use super::LlmError;
use crate::stage::Stage;
use crate::testkit::Expectation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProposalKind {
    GlossaryTerm,
    CompetencyQuestion,
    ClassDef,
    ObjectPropertyDef,
    DataPropertyDef,
    RelationAxiom,
    Instance,
    Annotation,
    SparqlTest,
    Revision,
}

impl ProposalKind {
    pub const ALL: [ProposalKind; 10] = [
        ProposalKind::GlossaryTerm,
        ProposalKind::CompetencyQuestion,
        ProposalKind::ClassDef,
        ProposalKind::ObjectPropertyDef,
        ProposalKind::DataPropertyDef,
        ProposalKind::RelationAxiom,
        ProposalKind::Instance,
        ProposalKind::Annotation,
        ProposalKind::SparqlTest,
        ProposalKind::Revision,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProposalKind::GlossaryTerm => "GlossaryTerm",
            ProposalKind::CompetencyQuestion => "CompetencyQuestion",
            ProposalKind::ClassDef => "ClassDef",
            ProposalKind::ObjectPropertyDef => "ObjectPropertyDef",
            ProposalKind::DataPropertyDef => "DataPropertyDef",
            ProposalKind::RelationAxiom => "RelationAxiom",
            ProposalKind::Instance => "Instance",
            ProposalKind::Annotation => "Annotation",
            ProposalKind::SparqlTest => "SparqlTest",
            ProposalKind::Revision => "Revision",
        }
    }

    pub fn fields(self) -> &'static [Field] {
        use FieldType::*;
        const fn f(name: &'static str, ty: FieldType, required: bool) -> Field {
            Field { name, ty, required }
        }
        const GLOSSARY: &[Field] = &[f("term", Text, true), f("interpretation", Text, true)];
        const CQ: &[Field] = &[f("question", Text, true), f("id", Text, false)];
        const CLASS: &[Field] = &[f("name", Text, true), f("definition", Text, false), f("parent", Text, false)];
        const PROPERTY: &[Field] = &[
            f("name", Text, true),
            f("domain", Text, false),
            f("range", Text, false),
            f("parent", Text, false),
            f("definition", Text, false),
        ];
        const RELATION: &[Field] = &[f("subject", Text, true), f("relation", Text, true), f("object", Text, true)];
        const INSTANCE: &[Field] = &[f("name", Text, true), f("class", Text, true), f("facts", Facts, false)];
        const ANNOTATION: &[Field] =
            &[f("entity", Text, true), f("label", Text, true), f("comment", Text, true), f("lang", Text, false)];
        const TEST: &[Field] = &[
            f("cqId", Text, true),
            f("query", Text, true),
            f("expectation", ExpectationSpec, false),
            f("description", Text, false),
        ];
        const REVISION: &[Field] = &[
            f("summary", Text, true),
            f("action", Text, false),
            f("sentiment", Text, false),
            f("supporting", TextList, false),
            f("quote", Text, false),
            f("rank", Integer, false),
            f("turtle", Text, false),
        ];
        match self {
            ProposalKind::GlossaryTerm => GLOSSARY,
            ProposalKind::CompetencyQuestion => CQ,
            ProposalKind::ClassDef => CLASS,
            ProposalKind::ObjectPropertyDef | ProposalKind::DataPropertyDef => PROPERTY,
            ProposalKind::RelationAxiom => RELATION,
            ProposalKind::Instance => INSTANCE,
            ProposalKind::Annotation => ANNOTATION,
            ProposalKind::SparqlTest => TEST,
            ProposalKind::Revision => REVISION,
        }
    }

    /// Field whose value identifies the proposal for voting and deduplication.
    fn key_fields(self) -> &'static [&'static str] {
        match self {
            ProposalKind::GlossaryTerm => &["term"],
            ProposalKind::CompetencyQuestion => &["question"],
            ProposalKind::ClassDef
            | ProposalKind::ObjectPropertyDef
            | ProposalKind::DataPropertyDef
            | ProposalKind::Instance => &["name"],
            ProposalKind::RelationAxiom => &["subject", "relation", "object"],
            ProposalKind::Annotation => &["entity"],
            ProposalKind::SparqlTest => &["cqId"],
            ProposalKind::Revision => &["summary"],
        }
    }
}

impl fmt::Display for ProposalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProposalKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProposalKind::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldType {
    Text,
    Integer,
    TextList,
    /// `[{"property", "object" | "value", "datatype"?, "lang"?}]`
    Facts,
    ExpectationSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    pub name: &'static str,
    pub ty: FieldType,
    pub required: bool,
}

/// A validated (kind, payload) pair before it is stamped with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalDraft {
    pub kind: ProposalKind,
    pub payload: Value,
}

impl ProposalDraft {
    /// First 16 hex digits of SHA-256 over the canonical JSON of kind and payload.
    /// serde_json maps keep keys sorted, so re-serialization cannot change it.
    pub fn content_id(&self) -> String {
        let canonical = serde_json::json!({ "kind": self.kind.name(), "payload": self.payload });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    /// Kind plus case-folded, whitespace-collapsed identifying name.
    pub fn vote_key(&self) -> String {
        let parts: Vec<String> = self
            .kind
            .key_fields()
            .iter()
            .map(|f| normalize_key(self.payload.get(*f).and_then(Value::as_str).unwrap_or("")))
            .collect();
        format!("{}:{}", self.kind.name(), parts.join("|"))
    }

    pub fn text(&self, field: &str) -> Option<&str> {
        self.payload.get(field).and_then(Value::as_str)
    }
}

pub fn normalize_key(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProposalStatus {
    Pending,
    Accepted,
    Rejected,
    Edited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteInfo {
    pub count: usize,
    pub samples: usize,
    pub majority: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub template_id: String,
    pub technique: Technique,
    pub prompt_hash: String,
    pub provider: String,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote: Option<VoteInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub id: String,
    pub kind: ProposalKind,
    pub payload: Value,
    pub status: ProposalStatus,
    pub stage: Stage,
    pub provenance: Provenance,
    /// Set only when status is Edited; `payload` keeps the original.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edited_payload: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject {
        #[serde(default)]
        reason: Option<String>,
    },
    Edit {
        payload: Value,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecisionError {
    #[error("proposal {0} was already decided")]
    AlreadyDecided(String),
    #[error("edited payload invalid: {0}")]
    InvalidEdit(LlmError),
}

impl Proposal {
    pub fn new(draft: ProposalDraft, stage: Stage, provenance: Provenance) -> Self {
        Proposal {
            id: draft.content_id(),
            kind: draft.kind,
            payload: draft.payload,
            status: ProposalStatus::Pending,
            stage,
            provenance,
            edited_payload: None,
            reason: None,
        }
    }

    /// Payload in force after review: the edit when there is one.
    pub fn effective_payload(&self) -> &Value {
        self.edited_payload.as_ref().unwrap_or(&self.payload)
    }

    pub fn effective_draft(&self) -> ProposalDraft {
        ProposalDraft { kind: self.kind, payload: self.effective_payload().clone() }
    }

    pub fn is_accepted(&self) -> bool {
        matches!(self.status, ProposalStatus::Accepted | ProposalStatus::Edited)
    }

    pub fn text(&self, field: &str) -> Option<&str> {
        self.effective_payload().get(field).and_then(Value::as_str)
    }

    /// Only Pending proposals can change status.
    pub fn decide(&mut self, decision: Decision) -> Result<(), DecisionError> {
        if self.status != ProposalStatus::Pending {
            return Err(DecisionError::AlreadyDecided(self.id.clone()));
        }
        match decision {
            Decision::Accept => self.status = ProposalStatus::Accepted,
            Decision::Reject { reason } => {
                self.status = ProposalStatus::Rejected;
                self.reason = reason;
            }
            Decision::Edit { payload } => {
                validate_payload(self.kind, &payload, "").map_err(DecisionError::InvalidEdit)?;
                self.status = ProposalStatus::Edited;
                self.edited_payload = Some(payload);
            }
        }
        Ok(())
    }
}

/// Extracts the first fenced block and validates it against the wire schema.
/// An empty `expected` slice accepts every kind.
pub fn parse_proposals(completion: &str, expected: &[ProposalKind]) -> Result<Vec<ProposalDraft>, LlmError> {
    let block = first_fenced_block(completion).ok_or(LlmError::NoStructuredBlock)?;
    let doc: Value = serde_json::from_str(block).map_err(|e| LlmError::MalformedBlock(e.to_string()))?;
    let root = doc.as_object().ok_or_else(|| LlmError::SchemaViolation("$".into()))?;
    reject_unknown(root, &["proposals"], "")?;
    let items = root
        .get("proposals")
        .ok_or_else(|| LlmError::SchemaViolation("proposals".into()))?
        .as_array()
        .ok_or_else(|| LlmError::SchemaViolation("proposals".into()))?;
    let mut drafts = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let at = format!("proposals[{i}]");
        let obj = item.as_object().ok_or_else(|| LlmError::SchemaViolation(at.clone()))?;
        reject_unknown(obj, &["kind", "payload"], &format!("{at}."))?;
        let kind_name =
            obj.get("kind").and_then(Value::as_str).ok_or_else(|| LlmError::SchemaViolation(format!("{at}.kind")))?;
        let kind: ProposalKind = kind_name.parse().map_err(|_| LlmError::SchemaViolation(format!("{at}.kind")))?;
        if !expected.is_empty() && !expected.contains(&kind) {
            return Err(LlmError::UnexpectedKind(kind_name.to_string()));
        }
        let payload = obj.get("payload").ok_or_else(|| LlmError::SchemaViolation(format!("{at}.payload")))?;
        validate_payload(kind, payload, "")?;
        drafts.push(ProposalDraft { kind, payload: payload.clone() });
    }
    Ok(drafts)
}

fn first_fenced_block(text: &str) -> Option<&str> {
    let start = text.find("```")?;
    let after = &text[start + 3..];
    let body_start = after.find('\n')? + 1;
    let body = &after[body_start..];
    let end = body.find("```")?;
    Some(&body[..end])
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<(), LlmError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(LlmError::SchemaViolation(format!("{prefix}{k}"))),
        None => Ok(()),
    }
}

/// Required fields are reported by bare name so callers can surface them directly.
pub fn validate_payload(kind: ProposalKind, payload: &Value, prefix: &str) -> Result<(), LlmError> {
    let obj = payload.as_object().ok_or_else(|| LlmError::SchemaViolation(format!("{prefix}payload")))?;
    let fields = kind.fields();
    let names: Vec<&str> = fields.iter().map(|f| f.name).collect();
    reject_unknown(obj, &names, prefix)?;
    for field in fields {
        let path = format!("{prefix}{}", field.name);
        match obj.get(field.name) {
            None | Some(Value::Null) if field.required => return Err(LlmError::SchemaViolation(path)),
            None | Some(Value::Null) => {}
            Some(v) => check_type(field.ty, v, &path)?,
        }
    }
    Ok(())
}

fn check_type(ty: FieldType, v: &Value, path: &str) -> Result<(), LlmError> {
    let bad = || LlmError::SchemaViolation(path.to_string());
    match ty {
        FieldType::Text => match v.as_str() {
            Some(s) if !s.trim().is_empty() => Ok(()),
            _ => Err(bad()),
        },
        FieldType::Integer => v.as_i64().map(|_| ()).ok_or_else(bad),
        FieldType::TextList => {
            let arr = v.as_array().ok_or_else(bad)?;
            match arr.iter().position(|x| !x.is_string()) {
                Some(i) => Err(LlmError::SchemaViolation(format!("{path}[{i}]"))),
                None => Ok(()),
            }
        }
        FieldType::ExpectationSpec => serde_json::from_value::<Expectation>(v.clone()).map(|_| ()).map_err(|_| bad()),
        FieldType::Facts => {
            let arr = v.as_array().ok_or_else(bad)?;
            for (i, fact) in arr.iter().enumerate() {
                let at = format!("{path}[{i}]");
                let obj = fact.as_object().ok_or_else(|| LlmError::SchemaViolation(at.clone()))?;
                reject_unknown(obj, &["property", "object", "value", "datatype", "lang"], &format!("{at}."))?;
                let text = |k: &str| obj.get(k).map(|x| x.as_str().filter(|s| !s.is_empty()).is_some());
                if text("property") != Some(true) {
                    return Err(LlmError::SchemaViolation(format!("{at}.property")));
                }
                match (text("object"), text("value")) {
                    (Some(true), None) if !obj.contains_key("datatype") && !obj.contains_key("lang") => {}
                    (None, Some(true)) if !(obj.contains_key("datatype") && obj.contains_key("lang")) => {
                        for k in ["datatype", "lang"] {
                            if text(k) == Some(false) {
                                return Err(LlmError::SchemaViolation(format!("{at}.{k}")));
                            }
                        }
                    }
                    _ => return Err(LlmError::SchemaViolation(format!("{at}.object"))),
                }
            }
            Ok(())
        }
    }
}

/// System message describing the wire schema for the given kinds.
pub fn format_instructions(kinds: &[ProposalKind]) -> String {
    let mut out = String::from(
        "You assist an ontology engineer. Reply with exactly one fenced ```json block containing \
         {\"proposals\": [{\"kind\": ..., \"payload\": {...}}]}. Unknown fields are rejected.\nAllowed kinds:\n",
    );
    for kind in kinds {
        let fields: Vec<String> = kind
            .fields()
            .iter()
            .map(|f| if f.required { format!("{} (required)", f.name) } else { f.name.to_string() })
            .collect();
        out.push_str(&format!("- {}: {}\n", kind.name(), fields.join(", ")));
    }
    out
}

/// Wraps drafts in the wire format, as a model would reply.
pub fn render_completion(drafts: &[ProposalDraft]) -> String {
    let items: Vec<Value> =
        drafts.iter().map(|d| serde_json::json!({ "kind": d.kind.name(), "payload": d.payload })).collect();
    let doc = serde_json::json!({ "proposals": items });
    format!("```json\n{}\n```\n", serde_json::to_string_pretty(&doc).expect("json"))
}
