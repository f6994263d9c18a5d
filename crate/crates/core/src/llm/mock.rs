//! Deterministic playback provider backed by a fixture directory, and a
//! recorder that writes such directories.
//!
//! Layout: `<prompt-hash>.txt` holds one or more samples separated by a line
//! containing only [`SAMPLE_SEPARATOR`]; `index.json` maps hash to a label.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Mutex;

use super::{ChatRequest, ChatResponse, LlmError, Provider, ResponseMeta};

pub const SAMPLE_SEPARATOR: &str = "-----8<-----";
pub const INDEX_FILE: &str = "index.json";

fn join_samples(samples: &[String]) -> String {
    samples.join(&format!("\n{SAMPLE_SEPARATOR}\n"))
}

fn split_samples(text: &str) -> Vec<String> {
    text.split(&format!("\n{SAMPLE_SEPARATOR}\n")).map(str::to_string).collect()
}

#[derive(Debug, Clone, Default)]
pub struct MockProvider {
    fixtures: BTreeMap<String, Vec<String>>,
    labels: BTreeMap<String, String>,
    strict: bool,
}

impl MockProvider {
    pub fn new(strict: bool) -> Self {
        MockProvider { strict, ..Default::default() }
    }

    pub fn load(dir: &Path, strict: bool) -> io::Result<Self> {
        let mut mock = MockProvider::new(strict);
        let index = dir.join(INDEX_FILE);
        if index.exists() {
            mock.labels = serde_json::from_str(&fs::read_to_string(&index)?)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", index.display())))?;
        }
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|x| x == "txt") {
                let hash = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                mock.fixtures.insert(hash, split_samples(&fs::read_to_string(&path)?));
            }
        }
        Ok(mock)
    }

    pub fn insert(&mut self, hash: impl Into<String>, samples: Vec<String>) {
        self.fixtures.insert(hash.into(), samples);
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }

    pub fn label(&self, hash: &str) -> Option<&str> {
        self.labels.get(hash).map(String::as_str)
    }
}

impl Provider for MockProvider {
    fn id(&self) -> String {
        if self.strict { "mock:strict" } else { "mock:lenient" }.to_string()
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        request.validate()?;
        let hash = request.prompt_hash();
        let completions: Vec<String> = match self.fixtures.get(&hash) {
            Some(samples) => samples.iter().take(request.n).cloned().collect(),
            None if self.strict => {
                return Err(LlmError::Provider {
                    status: 404,
                    body: format!("no fixture for prompt {hash} ({})", request.tag),
                })
            }
            None => {
                let stub = format!("Stub reply for prompt {hash}.\n```json\n{{\"proposals\": []}}\n```\n");
                vec![stub; request.n]
            }
        };
        Ok(ChatResponse { completions, meta: ResponseMeta { provider: self.id(), ..Default::default() } })
    }
}

/// Passes requests through to `inner` and keeps every response so it can be
/// written out as a fixture directory.
pub struct Recorder<P> {
    inner: P,
    recorded: Mutex<BTreeMap<String, (String, Vec<String>)>>,
}

impl<P: Provider> Recorder<P> {
    pub fn new(inner: P) -> Self {
        Recorder { inner, recorded: Mutex::new(BTreeMap::new()) }
    }

    pub fn write(&self, dir: &Path) -> io::Result<usize> {
        fs::create_dir_all(dir)?;
        let recorded = self.recorded.lock().expect("recorder lock");
        let index_path = dir.join(INDEX_FILE);
        // labels from earlier sessions in the same directory are kept
        let mut index: BTreeMap<String, String> = match fs::read_to_string(&index_path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?,
            Err(_) => BTreeMap::new(),
        };
        for (hash, (label, samples)) in recorded.iter() {
            fs::write(dir.join(format!("{hash}.txt")), join_samples(samples))?;
            index.insert(hash.clone(), label.clone());
        }
        let json = serde_json::to_string_pretty(&index).map_err(io::Error::other)?;
        fs::write(index_path, json + "\n")?;
        Ok(recorded.len())
    }
}

impl<P: Provider> Provider for Recorder<P> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let response = self.inner.complete(request)?;
        let mut recorded = self.recorded.lock().expect("recorder lock");
        let entry = recorded.entry(request.prompt_hash()).or_insert_with(|| (request.tag.clone(), Vec::new()));
        if response.completions.len() > entry.1.len() {
            entry.1 = response.completions.clone();
        }
        Ok(response)
    }
}

/// Provider answering from a closure; useful for scripted tests.
pub struct FnProvider<F>(pub F);

impl<F> Provider for FnProvider<F>
where
    F: Fn(&ChatRequest) -> Result<Vec<String>, LlmError> + Send + Sync,
{
    fn id(&self) -> String {
        "scripted".into()
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let completions = (self.0)(request)?;
        Ok(ChatResponse { completions, meta: ResponseMeta { provider: self.id(), ..Default::default() } })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Message;

    fn req(text: &str, n: usize) -> ChatRequest {
        ChatRequest::new(vec![Message::user(text)], 0.8, n, "label").unwrap()
    }

    #[test]
    fn playback_strict_and_lenient() {
        let r = req("hello", 1);
        let mut mock = MockProvider::new(true);
        mock.insert(r.prompt_hash(), vec!["canned".into()]);
        assert_eq!(mock.complete(&r).unwrap().completions, vec!["canned"]);
        let unknown = req("other", 1);
        match mock.complete(&unknown) {
            Err(LlmError::Provider { body, .. }) => assert!(body.starts_with("no fixture")),
            other => panic!("{other:?}"),
        }
        let lenient = MockProvider::new(false);
        let out = lenient.complete(&req("other", 2)).unwrap();
        assert_eq!(out.completions.len(), 2);
        assert!(crate::llm::parse_proposals(&out.completions[0], &[]).unwrap().is_empty());
    }

    #[test]
    fn record_then_replay_preserves_sample_order() {
        let dir = tempfile::tempdir().unwrap();
        let scripted = FnProvider(|r: &ChatRequest| Ok((0..r.n).map(|i| format!("sample {i}\nline two")).collect()));
        let recorder = Recorder::new(scripted);
        let r = req("vote", 3);
        let live = recorder.complete(&r).unwrap();
        assert_eq!(recorder.write(dir.path()).unwrap(), 1);
        let mock = MockProvider::load(dir.path(), true).unwrap();
        assert_eq!(mock.complete(&r).unwrap().completions, live.completions);
        assert_eq!(mock.complete(&req("vote", 2)).unwrap().completions, live.completions[..2]);
        assert_eq!(mock.label(&r.prompt_hash()), Some("label"));
    }
}
