//! Self-consistency: sample k completions and keep strict-majority proposals.

use super::proposal::{parse_proposals, ProposalDraft, ProposalKind};
use super::template::{PromptTemplate, RenderContext};
use super::{ChatRequest, ChatResponse, GenerationSettings, LlmError, Provider};

#[derive(Debug, Clone, PartialEq)]
pub struct VoteItem {
    pub key: String,
    /// Payload from the earliest sample proposing this key.
    pub draft: ProposalDraft,
    /// Number of samples proposing this key.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    pub samples: usize,
    /// Items with 2·count > samples, in first-appearance order.
    pub winners: Vec<VoteItem>,
    /// Everything else, in first-appearance order.
    pub minority: Vec<VoteItem>,
}

/// Unparseable samples count as empty; `k` remains the denominator even when
/// fewer samples are supplied.
pub fn tally(samples: &[Result<Vec<ProposalDraft>, LlmError>], k: usize) -> Tally {
    let mut items: Vec<VoteItem> = Vec::new();
    for sample in samples.iter().filter_map(|s| s.as_ref().ok()) {
        let mut seen = Vec::new();
        for draft in sample {
            let key = draft.vote_key();
            if seen.contains(&key) {
                continue;
            }
            match items.iter_mut().find(|i| i.key == key) {
                Some(item) => item.count += 1,
                None => items.push(VoteItem { key: key.clone(), draft: draft.clone(), count: 1 }),
            }
            seen.push(key);
        }
    }
    let (winners, minority) = items.into_iter().partition(|i| 2 * i.count > k);
    Tally { samples: k, winners, minority }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteOutcome {
    pub request: ChatRequest,
    pub response: ChatResponse,
    pub tally: Tally,
    /// Parse errors of rejected samples, by sample index.
    pub failures: Vec<(usize, LlmError)>,
}

pub fn self_consistency(
    provider: &dyn Provider,
    template: &PromptTemplate,
    ctx: &RenderContext,
    k: usize,
    settings: &GenerationSettings,
) -> Result<VoteOutcome, LlmError> {
    if k == 0 {
        return Err(LlmError::InvalidRequest("self-consistency needs k >= 1".into()));
    }
    let mut request = ChatRequest::new(template.messages(ctx)?, settings.sampling_temperature, k, &template.id)?;
    request.model = settings.model.clone();
    let response = provider.complete(&request)?;
    Ok(vote_on(request, response, &template.expected_kinds, k))
}

pub fn vote_on(request: ChatRequest, response: ChatResponse, kinds: &[ProposalKind], k: usize) -> VoteOutcome {
    let parsed: Vec<Result<Vec<ProposalDraft>, LlmError>> =
        response.completions.iter().take(k).map(|c| parse_proposals(c, kinds)).collect();
    let failures = parsed.iter().enumerate().filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e.clone()))).collect();
    VoteOutcome { tally: tally(&parsed, k), request, response, failures }
}
