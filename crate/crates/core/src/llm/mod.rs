//! Provider-neutral LLM access: prompt rendering, chat completion, sampling
//! strategies, retrieval, and parsing of structured proposals.

pub mod chain;
pub mod http;
pub mod mock;
pub mod proposal;
pub mod retrieval;
pub mod template;
pub mod vote;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use proposal::{parse_proposals, Proposal, ProposalDraft, ProposalKind, ProposalStatus, Provenance};
pub use template::{render_prompt, PromptTemplate, RenderContext, Technique};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message { role: Role::User, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub n: usize,
    /// Human-readable label for logs and fixture indexes; not part of the prompt hash.
    #[serde(skip)]
    pub tag: String,
}

impl ChatRequest {
    pub fn new(messages: Vec<Message>, temperature: f64, n: usize, tag: impl Into<String>) -> Result<Self, LlmError> {
        let req = ChatRequest { model: String::new(), messages, temperature, n, tag: tag.into() };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if !self.messages.iter().any(|m| m.role == Role::User) {
            return Err(LlmError::InvalidRequest("at least one user message is required".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::InvalidRequest(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        if self.n == 0 {
            return Err(LlmError::InvalidRequest("sample count must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 over the JSON encoding of the message list.
    pub fn prompt_hash(&self) -> String {
        prompt_hash(&self.messages)
    }
}

pub fn prompt_hash(messages: &[Message]) -> String {
    let json = serde_json::to_vec(messages).expect("messages serialize");
    hex::encode(Sha256::digest(&json))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseMeta {
    pub provider: String,
    pub latency_ms: u64,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub completions: Vec<String>,
    pub meta: ResponseMeta,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("provider error {status}: {body}")]
    Provider { status: u16, body: String },
    #[error("credential missing: set {0}")]
    CredentialMissing(&'static str),
    #[error("missing slot values: {}", .0.join(", "))]
    MissingSlot(Vec<String>),
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("completion contains no fenced structured block")]
    NoStructuredBlock,
    #[error("structured block is not valid JSON: {0}")]
    MalformedBlock(String),
    #[error("schema violation at {0}")]
    SchemaViolation(String),
    #[error("unexpected proposal kind {0}")]
    UnexpectedKind(String),
    #[error("unusable content: {0}")]
    InvalidContent(String),
    #[error("step {step}: {source}")]
    Step { step: usize, source: Box<LlmError> },
}

impl LlmError {
    /// Errors that come from parsing model output rather than from transport.
    pub fn is_parse_failure(&self) -> bool {
        matches!(
            self,
            LlmError::NoStructuredBlock
                | LlmError::MalformedBlock(_)
                | LlmError::SchemaViolation(_)
                | LlmError::UnexpectedKind(_)
                | LlmError::InvalidContent(_)
        )
    }
}

pub trait Provider: Send + Sync {
    fn id(&self) -> String;
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError>;
}

impl<P: Provider + ?Sized> Provider for Box<P> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).complete(request)
    }
}

impl<P: Provider + ?Sized> Provider for &P {
    fn id(&self) -> String {
        (**self).id()
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).complete(request)
    }
}

/// Sampling settings shared by all gateway calls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSettings {
    pub model: String,
    pub temperature: f64,
    pub sampling_temperature: f64,
}

impl Default for GenerationSettings {
    fn default() -> Self {
        GenerationSettings { model: "mock".into(), temperature: 0.0, sampling_temperature: 0.8 }
    }
}

/// One structured exchange: the final request and response, the parsed
/// drafts, and whether a repair re-prompt was needed.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredReply {
    pub request: ChatRequest,
    pub response: ChatResponse,
    pub outcome: Result<Vec<ProposalDraft>, LlmError>,
    pub repaired: bool,
}

/// Sends `messages` and parses the first completion. A parse failure triggers
/// exactly one repair re-prompt that quotes the error; a second failure is
/// returned in `outcome`. Transport and provider errors propagate.
pub fn request_proposals(
    provider: &dyn Provider,
    messages: Vec<Message>,
    kinds: &[ProposalKind],
    settings: &GenerationSettings,
    tag: &str,
) -> Result<StructuredReply, LlmError> {
    request_proposals_checked(provider, messages, kinds, settings, tag, &|_| Ok(()))
}

/// As [`request_proposals`], with `check` run on parsed drafts; its error
/// counts as a parse failure and shares the single repair attempt.
pub fn request_proposals_checked(
    provider: &dyn Provider,
    messages: Vec<Message>,
    kinds: &[ProposalKind],
    settings: &GenerationSettings,
    tag: &str,
    check: &dyn Fn(&[ProposalDraft]) -> Result<(), String>,
) -> Result<StructuredReply, LlmError> {
    let parse = |text: &str| {
        parse_proposals(text, kinds).and_then(|drafts| match check(&drafts) {
            Ok(()) => Ok(drafts),
            Err(msg) => Err(LlmError::InvalidContent(msg)),
        })
    };
    let mut request = ChatRequest::new(messages, settings.temperature, 1, tag)?;
    request.model = settings.model.clone();
    let response = provider.complete(&request)?;
    let first = response.completions.first().map(String::as_str).unwrap_or("");
    let error = match parse(first) {
        Ok(drafts) => return Ok(StructuredReply { request, response, outcome: Ok(drafts), repaired: false }),
        Err(e) if e.is_parse_failure() => e,
        Err(e) => return Err(e),
    };
    let repair = repair_request(&request, first, &error)?;
    let response = provider.complete(&repair)?;
    let outcome = parse(response.completions.first().map(String::as_str).unwrap_or(""));
    Ok(StructuredReply { request: repair, response, outcome, repaired: true })
}

/// The single repair re-prompt: the original conversation, the unusable
/// reply, and a user message quoting the error.
pub fn repair_request(request: &ChatRequest, bad_reply: &str, error: &LlmError) -> Result<ChatRequest, LlmError> {
    let mut messages = request.messages.clone();
    messages.push(Message { role: Role::Assistant, content: bad_reply.to_string() });
    messages.push(Message::user(format!(
        "Your reply could not be used ({error}). Reply again with exactly one fenced json block that follows the schema."
    )));
    let mut repair = ChatRequest::new(messages, request.temperature, 1, format!("{} (repair)", request.tag))?;
    repair.model = request.model.clone();
    Ok(repair)
}
