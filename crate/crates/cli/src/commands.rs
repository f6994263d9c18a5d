//! One function per subcommand. Data goes to `out`; diagnostics to stderr.

use std::fs;
use std::io::Write;
use std::path::Path;

use ontoforge_core::docgen::emit_markdown_docs;
use ontoforge_core::feedback::{ingest_feedback, themes_to_proposals};
use ontoforge_core::llm::retrieval::Document;
use ontoforge_core::llm::ProposalStatus;
use ontoforge_core::metrics::metrics_report;
use ontoforge_core::pipeline::{
    apply_decisions, init_project, merge_modelet, reopen_stage, revert_modelet, run_stage, run_tests, ClockMode,
    DecisionEntry, Gateway, Model, PipelineError, Project, ProjectConfig,
};
use ontoforge_core::stage::Stage;
use ontoforge_core::testkit::Tier;

use crate::args::{
    Cli, Command, ExportWhat, FeedbackCommand, Format, InitArgs, ModeletCommand, ProposalsCommand, ReviewCommand,
    StageCommand, StatusArg, TierArg,
};
use crate::session::{Failure, Session};

/// Decision files hold either a bare list or `{"decisions": [...]}`.
pub fn parse_decisions(text: &str) -> Result<Vec<DecisionEntry>, PipelineError> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Wrapped {
        decisions: Vec<DecisionEntry>,
    }
    let positioned =
        |e: serde_json::Error| PipelineError::ParseError { line: e.line(), column: e.column(), message: e.to_string() };
    if text.trim_start().starts_with('{') {
        serde_json::from_str::<Wrapped>(text).map(|w| w.decisions).map_err(positioned)
    } else {
        serde_json::from_str(text).map_err(positioned)
    }
}

pub fn status_filter(status: StatusArg) -> ProposalStatus {
    match status {
        StatusArg::Pending => ProposalStatus::Pending,
        StatusArg::Accepted => ProposalStatus::Accepted,
        StatusArg::Rejected => ProposalStatus::Rejected,
        StatusArg::Edited => ProposalStatus::Edited,
    }
}

pub fn tiers(tier: TierArg) -> Vec<Tier> {
    match tier {
        TierArg::Model => vec![Tier::Model],
        TierArg::Data => vec![Tier::Data],
        TierArg::Query => vec![Tier::Query],
        TierArg::All => vec![Tier::Model, Tier::Data, Tier::Query],
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let session = Session::from_cli(&cli);
    match cli.command {
        Command::Init(args) => init(&session, args, out),
        Command::Stage(StageCommand::Run { stage }) => stage_run(&session, stage, out),
        Command::Stage(StageCommand::Status) => stage_status(&session, out),
        Command::Stage(StageCommand::Reopen { stage }) => {
            let mut project = session.load()?;
            reopen_stage(&mut project, stage)?;
            session.save(&project)?;
            writeln!(out, "{stage} reopened")?;
            Ok(())
        }
        Command::Review(ReviewCommand::Apply { file }) => review_apply(&session, &file, out),
        Command::Proposals(ProposalsCommand::List { status, stage, format }) => {
            proposals_list(&session, status, stage, format, out)
        }
        Command::Metrics { format } => metrics(&session, format, out),
        Command::Test { tier } => test(&session, tier, out),
        Command::Docs { out: path } => export(&session, ExportWhat::Docs, path.as_deref(), out),
        Command::Feedback(FeedbackCommand::Ingest { file }) => feedback_ingest(&session, &file, out),
        Command::Feedback(FeedbackCommand::Summarize) => stage_run(&session, Stage::Feedback, out),
        Command::Feedback(FeedbackCommand::Propose) => with_gateway(&session, out, themes_to_proposals),
        Command::Modelet(cmd) => modelet(&session, cmd, out),
        Command::Export { what, out: path } => export(&session, what, path.as_deref(), out),
        Command::Serve { port, bind } => crate::server::serve_blocking(session, &bind, port),
        Command::Log { format } => log(&session, format, out),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Domain(format!("cannot read {}: {e}", path.display())))
}

fn init(session: &Session, args: InitArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut scenarios = Vec::new();
    for path in &args.scenarios {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Failure::Usage(format!("--scenario {}: no usable file name", path.display())))?;
        scenarios.push(Document::from_text(id, &read(path)?));
    }
    let seed = match &args.seed {
        Some(path) => Some(Model::from_turtle(&read(path)?)?),
        None => None,
    };
    let config = ProjectConfig {
        namespace: args.namespace,
        prefix: args.prefix,
        domain: args.domain,
        clock: if args.logical_clock { ProjectConfig::logical_clock() } else { ClockMode::System },
        ..ProjectConfig::default()
    };
    fs::create_dir_all(&session.project_dir)?;
    let project = init_project(&session.project_dir, &args.name, scenarios, config, seed)?;
    writeln!(
        out,
        "initialised project {} in {} with {} scenario(s)",
        project.name,
        session.project_dir.display(),
        project.scenarios.len()
    )?;
    Ok(())
}

/// Loads the project, runs `op` with a gateway, and saves whatever state
/// results. Failed model calls still leave a log entry worth keeping.
fn with_gateway(
    session: &Session,
    out: &mut dyn Write,
    op: impl FnOnce(&mut Project, Gateway<'_>) -> Result<Vec<String>, PipelineError>,
) -> Result<(), Failure> {
    let mut project = session.load()?;
    let provider = session.provider()?;
    let templates = session.templates()?;
    let result = op(&mut project, Gateway { provider: &provider, templates: &templates });
    session.save(&project)?;
    provider.finish()?;
    if let Some(dir) = provider.recording_dir() {
        if session.verbose {
            eprintln!("recorded completions into {}", dir.display());
        }
    }
    for id in result? {
        let p = project.proposal(&id).expect("new proposal is stored");
        writeln!(out, "{}  {:?}  {}", p.id, p.kind, compact(&p.payload))?;
    }
    Ok(())
}

fn stage_run(session: &Session, stage: Stage, out: &mut dyn Write) -> Result<(), Failure> {
    with_gateway(session, out, |project, gateway| run_stage(project, stage, gateway))?;
    if session.verbose {
        let project = session.load()?;
        eprintln!("{stage}: {:?}", project.status(stage));
    }
    Ok(())
}

fn stage_status(session: &Session, out: &mut dyn Write) -> Result<(), Failure> {
    let project = session.load()?;
    for stage in Stage::ALL {
        let pending = project.pending(stage).count();
        writeln!(out, "{:<20} {:<15} pending {pending}", stage.name(), format!("{:?}", project.status(stage)))?;
    }
    Ok(())
}

fn review_apply(session: &Session, file: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let entries = parse_decisions(&read(file)?).map_err(|e| Failure::Domain(format!("{}: {e}", file.display())))?;
    let mut project = session.load()?;
    apply_decisions(&mut project, &entries)?;
    session.save(&project)?;
    for e in &entries {
        let p = project.proposal(&e.proposal).expect("decided proposal exists");
        writeln!(out, "{}  {:?}", p.id, p.status)?;
    }
    Ok(())
}

fn compact(v: &serde_json::Value) -> String {
    serde_json::to_string(v).expect("values serialize")
}

fn proposals_list(
    session: &Session,
    status: Option<StatusArg>,
    stage: Option<Stage>,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let project = session.load()?;
    let selected: Vec<_> = project
        .proposals_with_status(status.map(status_filter))
        .into_iter()
        .filter(|p| stage.is_none_or(|s| p.stage == s))
        .collect();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&selected).expect("proposals serialize"))?,
        Format::Text => {
            for p in selected {
                writeln!(out, "{}  {:?}  {:?}  {}  {}", p.id, p.status, p.kind, p.stage, compact(&p.payload))?;
            }
        }
    }
    Ok(())
}

fn metrics(session: &Session, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let project = session.load()?;
    let report = metrics_report(&project.model.graph, &project.snapshot()?);
    match format {
        Format::Text => write!(out, "{}", report.render_text())?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("metrics serialize"))?,
    }
    Ok(())
}

fn test(session: &Session, tier: TierArg, out: &mut dyn Write) -> Result<(), Failure> {
    let mut project = session.load()?;
    let report = run_tests(&mut project, &tiers(tier))?;
    session.save(&project)?;
    write!(out, "{}", report.render_text())?;
    if report.is_green() {
        Ok(())
    } else {
        Err(Failure::Domain(format!("{} failing, {} erroring", report.failures(), report.errors())))
    }
}

fn feedback_ingest(session: &Session, file: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let mut project = session.load()?;
    let summary = ingest_feedback(&mut project, &read(file)?)?;
    session.save(&project)?;
    writeln!(out, "added {}, duplicates {}", summary.added, summary.duplicates)?;
    Ok(())
}

fn modelet(session: &Session, cmd: ModeletCommand, out: &mut dyn Write) -> Result<(), Failure> {
    let mut project = session.load()?;
    match cmd {
        ModeletCommand::List => {
            for m in &project.modelets {
                writeln!(out, "{}  {:?}  {} triples  {}", m.id, m.status, m.graph.len(), m.title)?;
            }
        }
        ModeletCommand::Merge { id } => {
            let result = merge_modelet(&mut project, &id);
            // the gate report and log entry are kept on failure too
            session.save(&project)?;
            match result {
                Ok(report) => {
                    write!(out, "{}", report.render_text())?;
                    writeln!(out, "{id} merged")?;
                }
                Err(e @ PipelineError::GateFailed { .. }) => {
                    if let PipelineError::GateFailed { report, .. } = &e {
                        eprint!("{}", report.render_text());
                    }
                    return Err(e.into());
                }
                Err(e) => return Err(e.into()),
            }
        }
        ModeletCommand::Revert { id } => {
            let removed = revert_modelet(&mut project, &id)?;
            session.save(&project)?;
            writeln!(out, "{id} reverted, {removed} triples removed from main")?;
        }
    }
    Ok(())
}

fn export(session: &Session, what: ExportWhat, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let project = session.load()?;
    let text = match what {
        ExportWhat::Ttl => project.model.to_turtle(),
        ExportWhat::Docs => emit_markdown_docs(&project.name, &project.snapshot()?, &project.glossary),
    };
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::Domain(format!("cannot write {}: {e}", p.display())))?;
            if session.verbose {
                eprintln!("wrote {}", p.display());
            }
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn log(session: &Session, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let project = session.load()?;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&project.log).expect("log serializes"))?,
        Format::Text => {
            for e in &project.log {
                writeln!(out, "{:>4} {} {:?} {:?} {} {}", e.seq, e.timestamp, e.actor, e.action, e.subject, e.detail)?;
            }
        }
    }
    Ok(())
}
