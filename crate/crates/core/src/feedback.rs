//! Stakeholder feedback: ingestion, theme summaries, and theme-driven proposals.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::llm::chain::prompt_chain;
use crate::llm::proposal::Decision;
use crate::llm::template::ids;
use crate::llm::{
    parse_proposals, repair_request, request_proposals_checked, LlmError, Proposal, ProposalDraft, ProposalKind,
    ProposalStatus, RenderContext,
};
use crate::pipeline::{Action, Actor, Gateway, PipelineError, Project, StageStatus};
use crate::stage::Stage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeedbackRole {
    #[serde(alias = "domain_expert", alias = "domain expert")]
    DomainExpert,
    #[serde(alias = "ontology_engineer", alias = "ontology engineer")]
    OntologyEngineer,
    #[serde(alias = "end_user", alias = "end user")]
    EndUser,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackItem {
    pub id: String,
    pub role: FeedbackRole,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FeedbackLine {
    role: FeedbackRole,
    text: String,
    #[serde(default)]
    timestamp: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub added: usize,
    pub duplicates: usize,
}

/// Appends items from a JSON list; an item whose (text, role) is already
/// present is skipped and counted as a duplicate.
pub fn ingest_feedback(project: &mut Project, source: &str) -> Result<IngestSummary, PipelineError> {
    let parse_error =
        |e: serde_json::Error| PipelineError::ParseError { line: e.line(), column: e.column(), message: e.to_string() };
    let lines: Vec<FeedbackLine> = serde_json::from_str(source).map_err(parse_error)?;
    for (i, line) in lines.iter().enumerate() {
        if line.text.trim().is_empty() {
            return Err(PipelineError::Precondition(format!("feedback item {} has empty text", i + 1)));
        }
        if let Some(ts) = &line.timestamp {
            chrono::DateTime::parse_from_rfc3339(ts)
                .map_err(|e| PipelineError::Precondition(format!("feedback item {}: timestamp {ts}: {e}", i + 1)))?;
        }
    }
    let mut summary = IngestSummary { added: 0, duplicates: 0 };
    for line in lines {
        let text = line.text.trim().to_string();
        if project.feedback.iter().any(|f| f.text == text && f.role == line.role) {
            summary.duplicates += 1;
            continue;
        }
        let id = format!("FB{:03}", project.feedback.len() + 1);
        project.feedback.push(FeedbackItem { id, role: line.role, text, timestamp: line.timestamp });
        summary.added += 1;
    }
    project.record(
        Actor::Human,
        Action::FeedbackIngested,
        "feedback",
        &format!("{} added, {} duplicates skipped", summary.added, summary.duplicates),
        None,
    );
    Ok(summary)
}

pub const SENTIMENTS: [&str; 4] = ["Positive", "Negative", "Mixed", "Neutral"];

/// A theme as carried by a Revision payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theme {
    pub summary: String,
    pub sentiment: String,
    pub supporting: Vec<String>,
    pub quote: String,
    pub action: String,
    pub rank: usize,
}

impl Theme {
    fn from_draft(d: &ProposalDraft) -> Theme {
        let text = |f: &str| d.text(f).unwrap_or_default().to_string();
        Theme {
            summary: text("summary"),
            sentiment: text("sentiment"),
            supporting: d
                .payload
                .get("supporting")
                .and_then(Value::as_array)
                .map(|a| a.iter().filter_map(Value::as_str).map(str::to_string).collect())
                .unwrap_or_default(),
            quote: text("quote"),
            action: text("action"),
            rank: d.payload.get("rank").and_then(Value::as_u64).unwrap_or(0) as usize,
        }
    }

    fn to_draft(&self) -> ProposalDraft {
        ProposalDraft {
            kind: ProposalKind::Revision,
            payload: json!({
                "summary": self.summary,
                "sentiment": self.sentiment,
                "supporting": self.supporting,
                "quote": self.quote,
                "action": self.action,
                "rank": self.rank,
            }),
        }
    }
}

/// Theme invariants for one chunk: known sentiment, distinct supporting ids
/// drawn from `known`, and ranks forming a permutation of 1..n.
pub fn validate_themes(drafts: &[ProposalDraft], known: &BTreeSet<&str>) -> Result<(), String> {
    let mut ranks = Vec::new();
    for d in drafts {
        let t = Theme::from_draft(d);
        if !SENTIMENTS.contains(&t.sentiment.as_str()) {
            return Err(format!("theme '{}': sentiment must be one of {}", t.summary, SENTIMENTS.join(", ")));
        }
        if t.supporting.is_empty() {
            return Err(format!("theme '{}' has no supporting items", t.summary));
        }
        let mut seen = BTreeSet::new();
        for id in &t.supporting {
            if !known.contains(id.as_str()) {
                return Err(format!("theme '{}' cites unknown item {id}", t.summary));
            }
            if !seen.insert(id) {
                return Err(format!("theme '{}' cites {id} twice", t.summary));
            }
        }
        ranks.push(t.rank);
    }
    ranks.sort_unstable();
    if ranks.iter().enumerate().any(|(i, r)| *r != i + 1) {
        return Err(format!("ranks {ranks:?} are not a permutation of 1..{}", drafts.len()));
    }
    Ok(())
}

/// Merges per-chunk themes by case-folded summary, then re-ranks by best
/// chunk rank with ties broken by support size and first appearance.
pub fn merge_themes(chunks: Vec<Vec<Theme>>) -> Vec<Theme> {
    let mut merged: Vec<Theme> = Vec::new();
    for theme in chunks.into_iter().flatten() {
        let key = theme.summary.to_lowercase();
        match merged.iter_mut().find(|m| m.summary.to_lowercase() == key) {
            Some(m) => {
                for id in theme.supporting {
                    if !m.supporting.contains(&id) {
                        m.supporting.push(id);
                    }
                }
                if m.sentiment != theme.sentiment {
                    m.sentiment = "Mixed".into();
                }
                m.rank = m.rank.min(theme.rank);
            }
            None => merged.push(theme),
        }
    }
    let mut order: Vec<usize> = (0..merged.len()).collect();
    order.sort_by_key(|&i| (merged[i].rank, std::cmp::Reverse(merged[i].supporting.len()), i));
    let mut out: Vec<Theme> = order.into_iter().map(|i| merged[i].clone()).collect();
    for (i, t) in out.iter_mut().enumerate() {
        t.rank = i + 1;
    }
    out
}

/// Summarizes all feedback into Pending Revision proposals, one per theme.
pub fn summarize_feedback(project: &mut Project, gateway: Gateway<'_>) -> Result<Vec<String>, PipelineError> {
    if project.feedback.is_empty() {
        return Err(PipelineError::Precondition("no feedback items have been ingested".into()));
    }
    let template = gateway.templates.get(ids::FEEDBACK_SUMMARY)?.clone();
    let chunk_size = project.config.feedback_chunk.max(1);
    let mut chunks = Vec::new();
    let mut prov = None;
    let chunk_count = project.feedback.len().div_ceil(chunk_size);
    for (n, chunk) in project.feedback.chunks(chunk_size).enumerate() {
        let items: Vec<String> = chunk.iter().map(|f| format!("[{}] ({:?}) {}", f.id, f.role, f.text)).collect();
        let known: BTreeSet<&str> = chunk.iter().map(|f| f.id.as_str()).collect();
        let ctx = RenderContext::new().slot("items", items.join("\n"));
        let tag = if chunk_count == 1 { template.id.clone() } else { format!("{}:{}", template.id, n + 1) };
        let reply = request_proposals_checked(
            gateway.provider,
            template.messages(&ctx)?,
            &template.expected_kinds,
            &project.config.generation,
            &tag,
            &|drafts| validate_themes(drafts, &known),
        )?;
        prov.get_or_insert_with(|| {
            crate::pipeline::provenance(project, &template, &reply.request, &gateway.provider.id())
        });
        chunks.push(reply.outcome?.iter().map(Theme::from_draft).collect());
    }
    let prov = prov.expect("at least one chunk");
    let proposals =
        merge_themes(chunks).iter().map(|t| Proposal::new(t.to_draft(), Stage::Feedback, prov.clone())).collect();
    Ok(crate::pipeline::add_proposals(project, proposals))
}

/// Runs the chaining template once per accepted theme not yet handled and
/// stores the resulting structural proposals as Pending. Output that stays
/// unparseable after one repair becomes a Rejected placeholder.
pub fn themes_to_proposals(project: &mut Project, gateway: Gateway<'_>) -> Result<Vec<String>, PipelineError> {
    let themes: Vec<Proposal> = project
        .proposals
        .iter()
        .filter(|p| p.stage == Stage::Feedback && p.kind == ProposalKind::Revision && p.is_accepted())
        .filter(|p| p.provenance.template_id == ids::FEEDBACK_SUMMARY)
        .filter(|p| !project.proposed_themes.contains(&p.id))
        .cloned()
        .collect();
    let template = gateway.templates.get(ids::FEEDBACK_PROPOSALS)?.clone();
    let mut work = project.clone();
    let mut added = Vec::new();
    for theme in themes {
        let summary = theme.text("summary").unwrap_or_default();
        let action = theme.text("action").unwrap_or("no action suggested");
        let ctx = RenderContext::new()
            .slot("themes", format!("- {summary}: {action}"))
            .slot("ontology", work.model.to_turtle());
        let transcript = prompt_chain(gateway.provider, &template, &ctx, &work.config.generation)?;
        if let Some(e) = transcript.error {
            project.record(Actor::System, Action::ProviderError, &theme.id, &e.to_string(), None);
            return Err(e.into());
        }
        let last = transcript.steps.last().expect("a chain has steps");
        let completion = transcript.final_completion().unwrap_or_default();
        let mut request = last.request.clone();
        let outcome = match parse_proposals(completion, &template.expected_kinds) {
            Err(e) if e.is_parse_failure() => {
                request = repair_request(&last.request, completion, &e)?;
                let response = gateway.provider.complete(&request)?;
                parse_proposals(
                    response.completions.first().map(String::as_str).unwrap_or(""),
                    &template.expected_kinds,
                )
            }
            other => other,
        };
        let prov = crate::pipeline::provenance(&work, &template, &request, &gateway.provider.id());
        let proposals = match outcome {
            Ok(drafts) => drafts.into_iter().map(|d| Proposal::new(d, Stage::Feedback, prov.clone())).collect(),
            Err(e) if e.is_parse_failure() => vec![unparseable(summary, &e, prov)],
            Err(e) => return Err(e.into()),
        };
        added.extend(crate::pipeline::add_proposals(&mut work, proposals));
        work.proposed_themes.push(theme.id.clone());
    }
    if work.proposals.iter().any(|p| p.stage == Stage::Feedback && p.status == ProposalStatus::Pending) {
        work.set_status(Stage::Feedback, StageStatus::AwaitingReview, "theme proposals pending");
    }
    *project = work;
    Ok(added)
}

fn unparseable(summary: &str, error: &LlmError, prov: crate::llm::Provenance) -> Proposal {
    let draft = ProposalDraft {
        kind: ProposalKind::Revision,
        payload: json!({ "summary": format!("No usable proposals for theme: {summary}") }),
    };
    let mut p = Proposal::new(draft, Stage::Feedback, prov);
    p.decide(Decision::Reject { reason: Some(format!("unparseable: {error}")) }).expect("fresh proposal is pending");
    p
}
