//! Per-invocation settings: project location, provider and templates.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use ontoforge_core::llm::http::{HttpConfig, HttpProvider, ENV_API_KEY, ENV_BASE_URL, ENV_MODEL};
use ontoforge_core::llm::mock::{MockProvider, Recorder};
use ontoforge_core::llm::template::TemplateLibrary;
use ontoforge_core::llm::{ChatRequest, ChatResponse, LlmError, Provider};
use ontoforge_core::pipeline::{load_project, save_project, PipelineError, Project};

use crate::args::Cli;

/// A failed invocation; `Usage` exits 2, `Domain` exits 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Domain(m) => f.write_str(m),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<LlmError> for Failure {
    fn from(e: LlmError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub enum ProviderChoice {
    /// Live HTTP provider configured from the environment plus overrides.
    #[default]
    Live,
    Mock {
        dir: PathBuf,
        strict: bool,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Session {
    pub project_dir: PathBuf,
    pub provider: ProviderChoice,
    pub record: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub verbose: bool,
}

impl Session {
    pub fn from_cli(cli: &Cli) -> Self {
        Session {
            project_dir: cli.project.clone(),
            provider: match &cli.mock {
                Some(dir) => ProviderChoice::Mock { dir: dir.clone(), strict: !cli.lenient },
                None => ProviderChoice::Live,
            },
            record: cli.record.clone(),
            templates: cli.templates.clone(),
            base_url: cli.base_url.clone(),
            model: cli.model_id.clone(),
            verbose: cli.verbose,
        }
    }

    pub fn load(&self) -> Result<Project, Failure> {
        load_project(&self.project_dir).map_err(|e| match e {
            PipelineError::Io(m) => {
                Failure::Domain(format!("cannot load project in {}: {m}", self.project_dir.display()))
            }
            other => other.into(),
        })
    }

    pub fn save(&self, project: &Project) -> Result<(), Failure> {
        Ok(save_project(project, &self.project_dir)?)
    }

    pub fn templates(&self) -> Result<TemplateLibrary, Failure> {
        let lib = TemplateLibrary::builtin();
        Ok(match &self.templates {
            Some(dir) => lib.with_overrides(dir)?,
            None => lib,
        })
    }

    /// Mock fixtures load now; a live client is built on the first model
    /// call, so stage-order errors surface before credential errors.
    pub fn provider(&self) -> Result<SessionProvider, Failure> {
        let inner = match &self.provider {
            ProviderChoice::Mock { dir, strict } => {
                let mock = MockProvider::load(dir, *strict)
                    .map_err(|e| Failure::Domain(format!("cannot load mock fixtures from {}: {e}", dir.display())))?;
                Inner::Mock(mock)
            }
            ProviderChoice::Live => Inner::Live {
                base_url: self.base_url.clone(),
                model: self.model.clone(),
                record: self.record.clone(),
                client: OnceLock::new(),
            },
        };
        Ok(SessionProvider { inner })
    }
}

fn live_config(base_url: Option<&str>, model: Option<&str>) -> Result<HttpConfig, LlmError> {
    let var = |name: &'static str, given: Option<&str>| {
        given
            .map(str::to_string)
            .or_else(|| std::env::var(name).ok())
            .filter(|v| !v.trim().is_empty())
            .ok_or(LlmError::CredentialMissing(name))
    };
    Ok(HttpConfig::new(var(ENV_BASE_URL, base_url)?, var(ENV_API_KEY, None)?, var(ENV_MODEL, model)?))
}

type Live = Result<Recorder<HttpProvider>, LlmError>;

enum Inner {
    Mock(MockProvider),
    Live { base_url: Option<String>, model: Option<String>, record: Option<PathBuf>, client: OnceLock<Live> },
}

/// Without `--record` the recorder's copies are simply never written.
fn connect(base_url: Option<&str>, model: Option<&str>) -> Live {
    Ok(Recorder::new(HttpProvider::new(live_config(base_url, model)?)?))
}

pub struct SessionProvider {
    inner: Inner,
}

impl SessionProvider {
    /// Writes recorded completions, if recording and anything was called.
    pub fn finish(&self) -> Result<(), Failure> {
        if let Inner::Live { record: Some(dir), client, .. } = &self.inner {
            if let Some(Ok(recorder)) = client.get() {
                recorder.write(dir)?;
            }
        }
        Ok(())
    }

    pub fn recording_dir(&self) -> Option<&Path> {
        match &self.inner {
            Inner::Live { record, .. } => record.as_deref(),
            Inner::Mock(_) => None,
        }
    }
}

impl Provider for SessionProvider {
    fn id(&self) -> String {
        match &self.inner {
            Inner::Mock(p) => p.id(),
            Inner::Live { model, client, .. } => match client.get() {
                Some(Ok(p)) => p.id(),
                _ => format!("http:{}", model.clone().or_else(|| std::env::var(ENV_MODEL).ok()).unwrap_or_default()),
            },
        }
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        match &self.inner {
            Inner::Mock(p) => p.complete(request),
            Inner::Live { base_url, model, client, .. } => client
                .get_or_init(|| connect(base_url.as_deref(), model.as_deref()))
                .as_ref()
                .map_err(Clone::clone)?
                .complete(request),
        }
    }
}
