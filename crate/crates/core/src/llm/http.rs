//! OpenAI-compatible chat-completions client.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{ChatRequest, ChatResponse, LlmError, Provider, ResponseMeta};

pub const ENV_BASE_URL: &str = "ONTOFORGE_LLM_BASE_URL";
pub const ENV_API_KEY: &str = "ONTOFORGE_LLM_API_KEY";
pub const ENV_MODEL: &str = "ONTOFORGE_LLM_MODEL";

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub base_url: String,
    pub api_key: String,
    pub model: String,
    pub timeout: Duration,
    /// Retries after the first attempt.
    pub max_retries: u32,
    /// Delay before retry i is `backoff * 2^i`.
    pub backoff: Duration,
}

impl HttpConfig {
    /// Two minute timeout, three retries, 500 ms base backoff.
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>, model: impl Into<String>) -> Self {
        HttpConfig {
            base_url: base_url.into(),
            api_key: api_key.into(),
            model: model.into(),
            timeout: Duration::from_secs(120),
            max_retries: 3,
            backoff: Duration::from_millis(500),
        }
    }

    pub fn from_env() -> Result<Self, LlmError> {
        let var = |name: &'static str| {
            std::env::var(name).ok().filter(|v| !v.trim().is_empty()).ok_or(LlmError::CredentialMissing(name))
        };
        Ok(HttpConfig::new(var(ENV_BASE_URL)?, var(ENV_API_KEY)?, var(ENV_MODEL)?))
    }
}

pub struct HttpProvider {
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(config: HttpConfig) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(HttpProvider { config, client })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, body: &Value) -> Result<(u16, String), LlmError> {
        let response = self
            .client
            .post(self.endpoint())
            .bearer_auth(&self.config.api_key)
            .json(body)
            .send()
            .map_err(|e| self.classify(e))?;
        let status = response.status().as_u16();
        let text = response.text().map_err(|e| self.classify(e))?;
        Ok((status, text))
    }

    fn classify(&self, e: reqwest::Error) -> LlmError {
        if e.is_timeout() {
            LlmError::Timeout(self.config.timeout)
        } else {
            LlmError::Transport(e.to_string())
        }
    }
}

fn retryable(err: &LlmError) -> bool {
    match err {
        LlmError::Timeout(_) | LlmError::Transport(_) => true,
        LlmError::Provider { status, .. } => *status == 429 || *status >= 500,
        _ => false,
    }
}

fn excerpt(body: &str) -> String {
    const MAX: usize = 300;
    match body.char_indices().nth(MAX) {
        Some((i, _)) => format!("{}...", &body[..i]),
        None => body.to_string(),
    }
}

/// Completions, prompt tokens, completion tokens.
type ParsedBody = (Vec<String>, Option<u64>, Option<u64>);

fn parse_body(status: u16, text: &str) -> Result<ParsedBody, LlmError> {
    let bad = |why: &str| LlmError::Provider { status, body: format!("{why}: {}", excerpt(text)) };
    let doc: Value = serde_json::from_str(text).map_err(|_| bad("response is not JSON"))?;
    let choices = doc.get("choices").and_then(Value::as_array).ok_or_else(|| bad("missing choices"))?;
    let completions: Vec<String> = choices
        .iter()
        .map(|c| c.pointer("/message/content").and_then(Value::as_str).map(str::to_string))
        .collect::<Option<_>>()
        .ok_or_else(|| bad("choice without message content"))?;
    if completions.is_empty() {
        return Err(bad("empty choices"));
    }
    let usage = |k: &str| doc.get("usage").and_then(|u| u.get(k)).and_then(Value::as_u64);
    Ok((completions, usage("prompt_tokens"), usage("completion_tokens")))
}

impl Provider for HttpProvider {
    fn id(&self) -> String {
        format!("http:{}", self.config.model)
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        request.validate()?;
        let model =
            if request.model.is_empty() || request.model == "mock" { &self.config.model } else { &request.model };
        let body = json!({
            "model": model,
            "messages": request.messages,
            "temperature": request.temperature,
            "n": request.n,
        });
        let started = Instant::now();
        let mut attempt = 0;
        loop {
            let result = self.attempt(&body).and_then(|(status, text)| {
                if (200..300).contains(&status) {
                    parse_body(status, &text)
                } else {
                    Err(LlmError::Provider { status, body: excerpt(&text) })
                }
            });
            match result {
                Ok((completions, prompt_tokens, completion_tokens)) => {
                    let meta = ResponseMeta {
                        provider: self.id(),
                        latency_ms: started.elapsed().as_millis() as u64,
                        prompt_tokens,
                        completion_tokens,
                    };
                    return Ok(ChatResponse { completions, meta });
                }
                Err(e) if retryable(&e) && attempt < self.config.max_retries => {
                    std::thread::sleep(self.config.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
