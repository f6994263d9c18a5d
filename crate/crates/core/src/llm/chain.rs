//! Prompt chaining: each step sees the previous step's completion.

use super::proposal::format_instructions;
use super::template::{PromptTemplate, RenderContext, Technique};
use super::{ChatRequest, ChatResponse, GenerationSettings, LlmError, Message, Provider};

const PROSE_INSTRUCTIONS: &str = "You assist an ontology engineer. Answer in concise plain prose.";

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep {
    pub request: ChatRequest,
    pub response: ChatResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTranscript {
    pub steps: Vec<ChainStep>,
    /// First failure, as `LlmError::Step` with a 1-based step index.
    pub error: Option<LlmError>,
}

impl ChainTranscript {
    pub fn final_completion(&self) -> Option<&str> {
        match self.error {
            Some(_) => None,
            None => self.steps.last().and_then(|s| s.response.completions.first()).map(String::as_str),
        }
    }
}

/// Only the final step is asked for structured proposals.
pub fn prompt_chain(
    provider: &dyn Provider,
    template: &PromptTemplate,
    ctx: &RenderContext,
    settings: &GenerationSettings,
) -> Result<ChainTranscript, LlmError> {
    if template.technique != Technique::PromptChaining {
        return Err(LlmError::InvalidTemplate(format!("{} is not a chaining template", template.id)));
    }
    template.validate()?;
    let last = template.steps.len() - 1;
    let mut transcript = ChainTranscript { steps: Vec::new(), error: None };
    let mut previous: Option<String> = None;
    for i in 0..=last {
        let step_result = (|| {
            let user = template.render_step(i, ctx, previous.as_deref())?;
            let system =
                if i == last { format_instructions(&template.expected_kinds) } else { PROSE_INSTRUCTIONS.to_string() };
            let mut request = ChatRequest::new(
                vec![Message::system(system), Message::user(user)],
                settings.temperature,
                1,
                format!("{}#{}", template.id, i + 1),
            )?;
            request.model = settings.model.clone();
            let response = provider.complete(&request)?;
            Ok(ChainStep { request, response })
        })();
        match step_result {
            Ok(step) => {
                previous = step.response.completions.first().cloned();
                transcript.steps.push(step);
            }
            Err(e) => {
                transcript.error = Some(LlmError::Step { step: i + 1, source: Box::new(e) });
                break;
            }
        }
    }
    Ok(transcript)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::mock::FnProvider;
    use crate::llm::proposal::ProposalKind;

    fn vehicle_chain() -> PromptTemplate {
        PromptTemplate {
            id: "vehicle".into(),
            technique: Technique::PromptChaining,
            body: String::new(),
            slots: vec![],
            expected_kinds: vec![ProposalKind::ClassDef],
            exemplars: vec![],
            steps: vec![
                "1. List core concepts for a vehicle ontology".into(),
                "2. Define relationships between these concepts: {previous}".into(),
                "3. Propose classes".into(),
            ],
            scaffold: vec![],
        }
    }

    #[test]
    fn three_steps_thread_previous_output() {
        let provider = FnProvider(|r: &ChatRequest| Ok(vec![format!("reply to {}", r.tag)]));
        let t =
            prompt_chain(&provider, &vehicle_chain(), &RenderContext::new(), &GenerationSettings::default()).unwrap();
        assert_eq!(t.steps.len(), 3);
        assert!(t.error.is_none());
        assert!(t.steps[1].request.messages[1].content.contains("reply to vehicle#1"));
        assert!(t.steps[2].request.messages[1].content.contains("reply to vehicle#2"));
        assert_eq!(t.final_completion(), Some("reply to vehicle#3"));
    }

    #[test]
    fn failure_at_step_two_keeps_partial_transcript() {
        let provider = FnProvider(|r: &ChatRequest| {
            if r.tag.ends_with("#2") {
                Err(LlmError::Provider { status: 500, body: "boom".into() })
            } else {
                Ok(vec!["ok".into()])
            }
        });
        let t =
            prompt_chain(&provider, &vehicle_chain(), &RenderContext::new(), &GenerationSettings::default()).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!(matches!(t.error, Some(LlmError::Step { step: 2, .. })));
        assert_eq!(t.final_completion(), None);
    }

    #[test]
    fn single_step_is_rejected() {
        let mut one = vehicle_chain();
        one.steps.truncate(1);
        let provider = FnProvider(|_: &ChatRequest| Ok(vec!["x".into()]));
        assert!(matches!(
            prompt_chain(&provider, &one, &RenderContext::new(), &GenerationSettings::default()),
            Err(LlmError::InvalidTemplate(_))
        ));
    }
}
