//! The seven-stage workflow: project state, stage runs, review decisions,
//! modelet merging, persistence and revision-log replay.

mod compile;
mod decisions;
mod modelets;
mod persist;
mod replay;
mod stages;

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use ontoforge_rdf::{parse_turtle, serialize_turtle, to_ntriples, Graph, PrefixMap, Triple};
use serde::{Deserialize, Serialize};

use crate::feedback::FeedbackItem;
use crate::llm::retrieval::Document;
use crate::llm::{GenerationSettings, LlmError, Proposal, ProposalStatus};
use crate::onto::{extract_snapshot, OntologySnapshot};
use crate::stage::Stage;
use crate::testkit::{TestCase, TestReport};

pub use compile::{datatype_iri, fallback_individual, lower_camel, upper_camel};
pub use decisions::{apply_decisions, gate_holds, DecisionEntry, Verdict};
pub use modelets::{merge_modelet, revert_modelet};
pub use persist::{load_project, save_project, write_interrupted, PROJECT_FILE, SCHEMA_VERSION};
pub use replay::{replay_model, ReplayedModel};
pub(crate) use stages::{add_proposals, provenance};
pub use stages::{evaluate, inventory, reopen_stage, run_stage, run_tests, Gateway};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("StageOrderViolation: cannot run {stage}: {reason}")]
    StageOrderViolation { stage: Stage, reason: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("UnknownProposal: {0}")]
    UnknownProposal(String),
    #[error("AlreadyDecided: proposal {0} is not pending")]
    AlreadyDecided(String),
    #[error("CompileError: proposal {proposal}: {reason}")]
    CompileError { proposal: String, reason: String },
    #[error("UnknownModelet: {0}")]
    UnknownModelet(String),
    #[error("GateFailed: modelet {modelet} failing {}", describe_failures(.failing))]
    GateFailed { modelet: String, failing: Vec<String>, report: Box<TestReport> },
    #[error("CorruptProject at line {line}, column {column}: {message}")]
    CorruptProject { line: usize, column: usize, message: String },
    #[error("SchemaVersionMismatch: file has version {found}, expected {expected}")]
    SchemaVersionMismatch { found: u64, expected: u32 },
    #[error("DuplicateProjectName: {} already holds a project", .0.display())]
    DuplicateProjectName(PathBuf),
    #[error("ParseError at line {line}, column {column}: {message}")]
    ParseError { line: usize, column: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

fn describe_failures(failing: &[String]) -> String {
    if failing.is_empty() {
        "model tests".to_string()
    } else {
        failing.join(", ")
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode")]
pub enum ClockMode {
    System,
    /// Entry n of the revision log is stamped `base + n` seconds.
    Logical {
        base: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectConfig {
    pub namespace: String,
    pub prefix: String,
    pub domain: String,
    pub language: String,
    pub clock: ClockMode,
    pub generation: GenerationSettings,
    pub self_consistency_k: usize,
    pub retrieval_k: usize,
    pub feedback_chunk: usize,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        ProjectConfig {
            namespace: "http://example.org/onto#".into(),
            prefix: "ex".into(),
            domain: "the application domain".into(),
            language: "en".into(),
            clock: ClockMode::System,
            generation: GenerationSettings::default(),
            self_consistency_k: 3,
            retrieval_k: 3,
            feedback_chunk: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlossaryEntry {
    pub term: String,
    pub interpretation: String,
    pub proposal: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CqStatus {
    Untested,
    Passing,
    Failing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompetencyQuestion {
    pub id: String,
    pub question: String,
    pub status: CqStatus,
    pub proposal: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeletStatus {
    Draft,
    UnderTest,
    Merged,
    Reverted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modelet {
    pub id: String,
    pub title: String,
    pub status: ModeletStatus,
    pub covers: Vec<String>,
    #[serde(with = "ntriples_graph")]
    pub graph: Graph,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_report: Option<TestReport>,
}

impl Modelet {
    pub fn is_open(&self) -> bool {
        matches!(self.status, ModeletStatus::Draft | ModeletStatus::UnderTest)
    }
}

/// The main model, stored as embedded Turtle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Model {
    pub prefixes: PrefixMap,
    pub graph: Graph,
}

impl Model {
    pub fn to_turtle(&self) -> String {
        serialize_turtle(&self.graph, &self.prefixes)
    }

    pub fn from_turtle(text: &str) -> Result<Self, PipelineError> {
        let (graph, prefixes) = parse_turtle(text, None).map_err(|e| {
            let (line, column) = e.position().unwrap_or((1, 1));
            PipelineError::ParseError { line, column, message: e.to_string() }
        })?;
        Ok(Model { prefixes, graph })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelWire {
    prefixes: PrefixMap,
    turtle: String,
}

impl Serialize for Model {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModelWire { prefixes: self.prefixes.clone(), turtle: self.to_turtle() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Model {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = ModelWire::deserialize(d)?;
        let (graph, _) = parse_turtle(&wire.turtle, None).map_err(serde::de::Error::custom)?;
        Ok(Model { prefixes: wire.prefixes, graph })
    }
}

pub(crate) mod ntriples_graph {
    use super::*;

    pub fn serialize<S: serde::Serializer>(g: &Graph, s: S) -> Result<S::Ok, S::Error> {
        to_ntriples(g).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Graph, D::Error> {
        let lines = Vec::<String>::deserialize(d)?;
        graph_from_lines(&lines).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn graph_from_lines(lines: &[String]) -> Result<Graph, ontoforge_rdf::RdfError> {
    parse_turtle(&lines.join("\n"), None).map(|(g, _)| g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageStatus {
    NotStarted,
    AwaitingReview,
    Passed,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Actor {
    Human,
    Llm,
    System,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Created,
    StageRun,
    StageStatus,
    StageReopened,
    ProposalAdded,
    Decided,
    ModelChanged,
    TestRegistered,
    ModeletCreated,
    ModeletStatus,
    ModeletMerged,
    GateFailed,
    TestsRun,
    FeedbackIngested,
    ProviderError,
}

/// Triples added to or removed from one graph: `main` or a modelet id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta {
    pub target: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub added: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub removed: Vec<String>,
}

pub const MAIN_TARGET: &str = "main";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionEntry {
    pub seq: usize,
    pub timestamp: String,
    pub actor: Actor,
    pub action: Action,
    pub subject: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Delta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub name: String,
    pub config: ProjectConfig,
    pub scenarios: Vec<Document>,
    pub glossary: Vec<GlossaryEntry>,
    pub questions: Vec<CompetencyQuestion>,
    pub modelets: Vec<Modelet>,
    pub model: Model,
    pub proposals: Vec<Proposal>,
    pub tests: Vec<TestCase>,
    pub feedback: Vec<FeedbackItem>,
    /// Accepted feedback themes already turned into structural proposals.
    pub proposed_themes: Vec<String>,
    pub stages: BTreeMap<Stage, StageStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_report: Option<TestReport>,
    pub log: Vec<RevisionEntry>,
}

const LOGICAL_BASE: &str = "2025-01-01T00:00:00Z";

impl ProjectConfig {
    pub fn logical_clock() -> ClockMode {
        ClockMode::Logical { base: LOGICAL_BASE.into() }
    }
}

impl Project {
    /// A fresh project. The caller persists it; see [`init_project`].
    pub fn new(
        name: &str,
        scenarios: Vec<Document>,
        config: ProjectConfig,
        seed: Option<Model>,
    ) -> Result<Self, PipelineError> {
        if scenarios.is_empty() {
            return Err(PipelineError::Precondition("at least one scenario text is required".into()));
        }
        if let Some(doc) = scenarios.iter().find(|d| d.text.trim().is_empty()) {
            return Err(PipelineError::Precondition(format!("scenario {} is empty", doc.id)));
        }
        let mut prefixes = PrefixMap::standard();
        prefixes.insert(config.prefix.clone(), config.namespace.clone());
        let mut project = Project {
            name: name.to_string(),
            config,
            scenarios,
            glossary: vec![],
            questions: vec![],
            modelets: vec![],
            model: Model { prefixes, graph: Graph::new() },
            proposals: vec![],
            tests: vec![],
            feedback: vec![],
            proposed_themes: vec![],
            stages: Stage::ALL.into_iter().map(|s| (s, StageStatus::NotStarted)).collect(),
            last_report: None,
            log: vec![],
        };
        project.record(
            Actor::Human,
            Action::Created,
            name,
            &format!("{} scenario document(s)", project.scenarios.len()),
            None,
        );
        if let Some(seed) = seed {
            project.model.prefixes.extend_missing(&seed.prefixes);
            let added: Vec<Triple> = seed.graph.iter().cloned().collect();
            project.add_triples(MAIN_TARGET, added, Actor::Human, "seed model")?;
        }
        Ok(project)
    }

    /// Current time under the configured clock; never earlier than the last log entry.
    pub fn now(&self) -> String {
        match &self.config.clock {
            ClockMode::Logical { base } => {
                let base = DateTime::parse_from_rfc3339(base).map(|d| d.with_timezone(&Utc)).unwrap_or_else(|_| {
                    DateTime::parse_from_rfc3339(LOGICAL_BASE).expect("valid base").with_timezone(&Utc)
                });
                (base + Duration::seconds(self.log.len() as i64)).to_rfc3339_opts(SecondsFormat::Secs, true)
            }
            ClockMode::System => {
                let now = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
                match self.log.last() {
                    Some(last) if last.timestamp > now => last.timestamp.clone(),
                    _ => now,
                }
            }
        }
    }

    /// Wall-clock milliseconds since `started`; always 0 under a logical
    /// clock so replays stay byte-identical.
    pub fn elapsed_ms(&self, started: std::time::Instant) -> u64 {
        match self.config.clock {
            ClockMode::Logical { .. } => 0,
            ClockMode::System => started.elapsed().as_millis() as u64,
        }
    }

    pub fn record(&mut self, actor: Actor, action: Action, subject: &str, detail: &str, delta: Option<Delta>) {
        let entry = RevisionEntry {
            seq: self.log.len(),
            timestamp: self.now(),
            actor,
            action,
            subject: subject.to_string(),
            detail: detail.to_string(),
            delta,
        };
        self.log.push(entry);
    }

    pub fn status(&self, stage: Stage) -> StageStatus {
        self.stages.get(&stage).copied().unwrap_or(StageStatus::NotStarted)
    }

    pub(crate) fn set_status(&mut self, stage: Stage, status: StageStatus, why: &str) {
        if self.status(stage) != status {
            self.stages.insert(stage, status);
            self.record(Actor::System, Action::StageStatus, stage.name(), &format!("{status:?}: {why}"), None);
        }
    }

    pub fn proposal(&self, id: &str) -> Option<&Proposal> {
        self.proposals.iter().find(|p| p.id == id)
    }

    pub fn pending(&self, stage: Stage) -> impl Iterator<Item = &Proposal> {
        self.proposals.iter().filter(move |p| p.stage == stage && p.status == ProposalStatus::Pending)
    }

    pub fn proposals_with_status(&self, status: Option<ProposalStatus>) -> Vec<&Proposal> {
        self.proposals.iter().filter(|p| status.is_none_or(|s| p.status == s)).collect()
    }

    pub fn modelet(&self, id: &str) -> Option<&Modelet> {
        self.modelets.iter().find(|m| m.id == id)
    }

    /// The newest Draft or UnderTest modelet.
    pub fn open_modelet(&self) -> Option<&Modelet> {
        self.modelets.iter().rev().find(|m| m.is_open())
    }

    /// Main model plus every Draft or UnderTest modelet.
    pub fn working_graph(&self) -> Graph {
        let mut g = self.model.graph.clone();
        for m in self.modelets.iter().filter(|m| m.is_open()) {
            g.absorb(&m.graph);
        }
        g
    }

    pub fn snapshot(&self) -> Result<OntologySnapshot, PipelineError> {
        extract_snapshot(&self.model.graph).map_err(|e| PipelineError::Precondition(e.to_string()))
    }

    fn graph_mut(&mut self, target: &str) -> Option<&mut Graph> {
        if target == MAIN_TARGET {
            Some(&mut self.model.graph)
        } else {
            self.modelets.iter_mut().find(|m| m.id == target).map(|m| &mut m.graph)
        }
    }

    /// Adds triples to `target`, logging only those that were new.
    pub(crate) fn add_triples(
        &mut self,
        target: &str,
        triples: Vec<Triple>,
        actor: Actor,
        why: &str,
    ) -> Result<usize, PipelineError> {
        let graph = self.graph_mut(target).ok_or_else(|| PipelineError::UnknownModelet(target.to_string()))?;
        let mut added = Graph::new();
        for t in triples {
            if graph.insert(t.clone()) {
                added.insert(t);
            }
        }
        let n = added.len();
        if n > 0 {
            let delta = Delta { target: target.to_string(), added: to_ntriples(&added), removed: vec![] };
            self.record(actor, Action::ModelChanged, target, why, Some(delta));
        }
        Ok(n)
    }

    pub(crate) fn remove_triples(
        &mut self,
        target: &str,
        triples: &[Triple],
        actor: Actor,
        why: &str,
    ) -> Result<usize, PipelineError> {
        let graph = self.graph_mut(target).ok_or_else(|| PipelineError::UnknownModelet(target.to_string()))?;
        let mut removed = Graph::new();
        for t in triples {
            if graph.remove(t) {
                removed.insert(t.clone());
            }
        }
        let n = removed.len();
        if n > 0 {
            let delta = Delta { target: target.to_string(), added: vec![], removed: to_ntriples(&removed) };
            self.record(actor, Action::ModelChanged, target, why, Some(delta));
        }
        Ok(n)
    }
}

/// Creates a project in `dir` and saves it. Fails if `dir` already holds one.
pub fn init_project(
    dir: &std::path::Path,
    name: &str,
    scenarios: Vec<Document>,
    config: ProjectConfig,
    seed: Option<Model>,
) -> Result<Project, PipelineError> {
    if dir.join(PROJECT_FILE).exists() {
        return Err(PipelineError::DuplicateProjectName(dir.to_path_buf()));
    }
    let project = Project::new(name, scenarios, config, seed)?;
    save_project(&project, dir)?;
    Ok(project)
}
