//! JSON review API over a single project directory.
//!
//! Mutations run one at a time behind `writer` and persist the project before
//! the response is sent; readers see either the old or the new state.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex, OnceLock, RwLock};
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ontoforge_core::feedback::ingest_feedback;
use ontoforge_core::llm::LlmError;
use ontoforge_core::metrics::metrics_report;
use ontoforge_core::pipeline::{
    apply_decisions, merge_modelet, reopen_stage, run_stage, run_tests, Gateway, PipelineError, Project,
};
use ontoforge_core::stage::Stage;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::{StatusArg, TierArg};
use crate::commands::{parse_decisions, status_filter, tiers};
use crate::session::{Failure, Session, SessionProvider};

pub struct AppState {
    session: Session,
    project: RwLock<Project>,
    writer: Mutex<()>,
    provider: OnceLock<SessionProvider>,
}

impl AppState {
    pub fn open(session: Session) -> Result<Self, Failure> {
        let project = session.load()?;
        Ok(AppState { session, project: RwLock::new(project), writer: Mutex::new(()), provider: OnceLock::new() })
    }

    fn read<T>(&self, f: impl FnOnce(&Project) -> T) -> T {
        f(&self.project.read().expect("project lock"))
    }

    fn provider(&self) -> Result<&SessionProvider, ApiError> {
        if let Some(p) = self.provider.get() {
            return Ok(p);
        }
        let built = self.session.provider().map_err(|e| ApiError::provider(&e.to_string()))?;
        Ok(self.provider.get_or_init(|| built))
    }

    /// Runs `op` on a copy of the project and always persists the copy: failed
    /// operations may still have logged something.
    fn mutate<T>(&self, op: impl FnOnce(&mut Project) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let _guard = self.writer.lock().expect("writer lock");
        let mut work = self.read(Project::clone);
        let result = op(&mut work);
        self.session.save(&work).map_err(|e| ApiError::internal(&e.to_string()))?;
        *self.project.write().expect("project lock") = work;
        result
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, kind: &str, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": kind, "message": message.into() }) }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    fn not_found(kind: &str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, kind, message)
    }

    fn internal(message: &str) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }

    fn provider(message: &str) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "ProviderError", message)
    }
}

/// Provider failures are reduced to their category so response bodies never
/// echo upstream payloads or credentials.
fn sanitize(e: &LlmError) -> String {
    match e {
        LlmError::Timeout(d) => format!("provider timed out after {} ms", d.as_millis()),
        LlmError::Transport(_) => "provider unreachable".into(),
        LlmError::Provider { status, .. } => format!("provider returned status {status}"),
        LlmError::CredentialMissing(var) => format!("provider not configured: {var} is unset"),
        LlmError::Step { step, source } => format!("prompt chain step {step}: {}", sanitize(source)),
        e if e.is_parse_failure() => "provider reply could not be parsed".into(),
        _ => "provider request failed".into(),
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let message = e.to_string();
        match e {
            PipelineError::UnknownProposal(_) => ApiError::not_found("UnknownProposal", message),
            PipelineError::UnknownModelet(_) => ApiError::not_found("UnknownModelet", message),
            PipelineError::StageOrderViolation { .. } => {
                ApiError::new(StatusCode::CONFLICT, "StageOrderViolation", message)
            }
            PipelineError::AlreadyDecided(_) => ApiError::new(StatusCode::CONFLICT, "AlreadyDecided", message),
            PipelineError::Precondition(_) => ApiError::new(StatusCode::CONFLICT, "Precondition", message),
            PipelineError::CompileError { .. } => ApiError::new(StatusCode::CONFLICT, "CompileError", message),
            PipelineError::GateFailed { ref failing, ref report, .. } => ApiError {
                status: StatusCode::CONFLICT,
                body: json!({ "error": "GateFailed", "message": message, "failing": failing, "report": report }),
            },
            PipelineError::ParseError { .. } => ApiError::bad_request(message),
            PipelineError::Llm(ref llm) => ApiError::provider(&sanitize(llm)),
            PipelineError::CorruptProject { .. }
            | PipelineError::SchemaVersionMismatch { .. }
            | PipelineError::DuplicateProjectName(_)
            | PipelineError::Io(_) => ApiError::internal(&message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

/// Blocking pipeline work (file I/O, model calls) stays off the async workers.
async fn blocking<F>(state: Arc<AppState>, f: F) -> ApiResult
where
    F: FnOnce(&AppState) -> ApiResult + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&state)).await.map_err(|e| ApiError::internal(&e.to_string()))?
}

fn ok(value: impl serde::Serialize) -> ApiResult {
    Ok(Json(value).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/project", get(project_summary))
        .route("/api/proposals", get(proposals))
        .route("/api/decisions", post(decisions))
        .route("/api/stages/{stage}/run", post(stage_run))
        .route("/api/stages/{stage}/reopen", post(stage_reopen))
        .route("/api/metrics", get(metrics))
        .route("/api/tests/report", get(tests_report))
        .route("/api/tests/run", post(tests_run))
        .route("/api/ontology.ttl", get(ontology))
        .route("/api/log", get(log))
        .route("/api/modelets/{id}/merge", post(modelet_merge))
        .route("/api/feedback", post(feedback))
        .with_state(state)
}

async fn project_summary(State(state): State<Arc<AppState>>) -> ApiResult {
    state.read(|p| {
        let count = |s| p.proposals.iter().filter(|x| x.status == s).count();
        use ontoforge_core::llm::ProposalStatus::*;
        ok(json!({
            "name": p.name,
            "stages": Stage::ALL.iter().map(|s| json!({
                "stage": s.name(),
                "status": p.status(*s),
                "pending": p.pending(*s).count(),
            })).collect::<Vec<_>>(),
            "proposals": {
                "Pending": count(Pending),
                "Accepted": count(Accepted),
                "Rejected": count(Rejected),
                "Edited": count(Edited),
            },
            "modelets": p.modelets.iter().map(|m| json!({ "id": m.id, "title": m.title, "status": m.status })).collect::<Vec<_>>(),
            "questions": p.questions.len(),
            "tests": p.tests.len(),
            "feedback": p.feedback.len(),
            "log_entries": p.log.len(),
            "last_report_green": p.last_report.as_ref().map(|r| r.is_green()),
        }))
    })
}

#[derive(Deserialize)]
struct ProposalQuery {
    status: Option<String>,
    stage: Option<String>,
}

fn parse_status(text: &str) -> Result<StatusArg, ApiError> {
    use clap::ValueEnum;
    StatusArg::from_str(text, true).map_err(|_| ApiError::bad_request(format!("unknown status '{text}'")))
}

async fn proposals(State(state): State<Arc<AppState>>, Query(q): Query<ProposalQuery>) -> ApiResult {
    let status = q.status.as_deref().map(parse_status).transpose()?.map(status_filter);
    let stage = match q.stage.as_deref() {
        Some(s) => Some(s.parse::<Stage>().map_err(|e| ApiError::bad_request(e.to_string()))?),
        None => None,
    };
    state.read(|p| {
        let list: Vec<_> =
            p.proposals_with_status(status).into_iter().filter(|x| stage.is_none_or(|s| x.stage == s)).collect();
        ok(list)
    })
}

async fn decisions(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    let entries = parse_decisions(text)?;
    if entries.is_empty() {
        return Err(ApiError::bad_request("no decisions given"));
    }
    blocking(state, move |state| {
        state.mutate(|project| {
            apply_decisions(project, &entries)?;
            let decided: Vec<_> = entries.iter().filter_map(|e| project.proposal(&e.proposal)).collect();
            ok(json!({ "applied": decided.len(), "proposals": decided }))
        })
    })
    .await
}

fn stage_param(name: &str) -> Result<Stage, ApiError> {
    name.parse().map_err(|e: ontoforge_core::stage::UnknownStage| ApiError::not_found("UnknownStage", e.to_string()))
}

async fn stage_run(State(state): State<Arc<AppState>>, Path(stage): Path<String>) -> ApiResult {
    let stage = stage_param(&stage)?;
    blocking(state, move |state| {
        let provider = state.provider()?;
        let templates = state.session.templates().map_err(|e| ApiError::internal(&e.to_string()))?;
        let response = state.mutate(|project| {
            let ids = run_stage(project, stage, Gateway { provider, templates: &templates })?;
            let created: Vec<_> = ids.iter().filter_map(|id| project.proposal(id)).collect();
            ok(json!({ "stage": stage.name(), "status": project.status(stage), "proposals": created }))
        });
        provider.finish().map_err(|e| ApiError::internal(&e.to_string()))?;
        response
    })
    .await
}

async fn stage_reopen(State(state): State<Arc<AppState>>, Path(stage): Path<String>) -> ApiResult {
    let stage = stage_param(&stage)?;
    blocking(state, move |state| {
        state.mutate(|project| {
            reopen_stage(project, stage)?;
            ok(Stage::ALL
                .iter()
                .map(|s| json!({ "stage": s.name(), "status": project.status(*s) }))
                .collect::<Vec<_>>())
        })
    })
    .await
}

async fn metrics(State(state): State<Arc<AppState>>) -> ApiResult {
    state.read(|p| ok(metrics_report(&p.model.graph, &p.snapshot()?)))
}

async fn tests_report(State(state): State<Arc<AppState>>) -> ApiResult {
    state.read(|p| match &p.last_report {
        Some(r) => ok(r),
        None => Err(ApiError::not_found("NoReport", "no test run recorded yet")),
    })
}

#[derive(Deserialize)]
struct TierQuery {
    tier: Option<String>,
}

async fn tests_run(State(state): State<Arc<AppState>>, Query(q): Query<TierQuery>) -> ApiResult {
    use clap::ValueEnum;
    let tier = match q.tier.as_deref() {
        Some(t) => TierArg::from_str(t, true).map_err(|_| ApiError::bad_request(format!("unknown tier '{t}'")))?,
        None => TierArg::All,
    };
    blocking(state, move |state| state.mutate(|project| ok(run_tests(project, &tiers(tier))?))).await
}

async fn ontology(State(state): State<Arc<AppState>>) -> ApiResult {
    let ttl = state.read(|p| p.model.to_turtle());
    Ok(([(header::CONTENT_TYPE, "text/turtle; charset=utf-8")], ttl).into_response())
}

async fn log(State(state): State<Arc<AppState>>) -> ApiResult {
    state.read(|p| ok(&p.log))
}

async fn modelet_merge(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    blocking(state, move |state| state.mutate(|project| ok(merge_modelet(project, &id)?))).await
}

async fn feedback(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let text = String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    blocking(state, move |state| {
        state.mutate(|project| {
            let summary = ingest_feedback(project, &text).map_err(|e| match e {
                PipelineError::Precondition(m) => ApiError::bad_request(m),
                other => other.into(),
            })?;
            ok(json!({ "added": summary.added, "duplicates": summary.duplicates }))
        })
    })
    .await
}

/// A server running on its own thread and runtime.
pub struct RunningServer {
    pub addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl RunningServer {
    /// Stops accepting connections and waits for in-flight requests.
    pub fn stop(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.join()
    }

    /// Blocks until the server exits (Ctrl-C or `stop`).
    pub fn join(&mut self) -> std::io::Result<()> {
        match self.thread.take() {
            Some(t) => t.join().map_err(|_| std::io::Error::other("server thread panicked"))?,
            None => Ok(()),
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
            let _ = self.join();
        }
    }
}

/// Binds `addr` (port 0 picks a free port) and serves in the background.
pub fn start(session: Session, addr: &str) -> Result<RunningServer, Failure> {
    let state = Arc::new(AppState::open(session)?);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let listener = runtime
        .block_on(tokio::net::TcpListener::bind(addr))
        .map_err(|e| Failure::Domain(format!("cannot bind {addr}: {e}")))?;
    let bound = listener.local_addr()?;
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let app = router(state);
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let stop = async move {
                tokio::select! {
                    _ = rx => {}
                    _ = tokio::signal::ctrl_c() => {}
                }
            };
            axum::serve(listener, app).with_graceful_shutdown(stop).await
        })
    });
    Ok(RunningServer { addr: bound, shutdown: Some(tx), thread: Some(thread) })
}

pub fn serve_blocking(session: Session, bind: &str, port: u16) -> Result<(), Failure> {
    let addr = format!("{bind}:{port}");
    let loopback = addr.parse::<SocketAddr>().map(|a| a.ip().is_loopback()).unwrap_or(bind == "localhost");
    if !loopback {
        eprintln!("warning: {bind} is not a loopback address and the API has no authentication");
    }
    let mut server = start(session, &addr)?;
    eprintln!("listening on http://{}", server.addr);
    server.join()?;
    Ok(())
}
