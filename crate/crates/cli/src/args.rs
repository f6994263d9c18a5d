//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ontoforge_core::stage::Stage;

fn stage(s: &str) -> Result<Stage, String> {
    s.parse().map_err(|e: ontoforge_core::stage::UnknownStage| {
        let names: Vec<&str> = Stage::ALL.iter().map(|s| s.name()).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Parser)]
#[command(name = "ontoforge", version, about = "LLM-assisted ontology engineering pipeline")]
pub struct Cli {
    /// Project directory holding project.json.
    #[arg(long, global = true, default_value = ".")]
    pub project: PathBuf,
    /// Replay recorded completions from this fixture directory instead of calling a live model.
    #[arg(long, global = true, value_name = "DIR")]
    pub mock: Option<PathBuf>,
    /// With --mock, answer unknown prompts with an empty proposal list instead of failing.
    #[arg(long, global = true, requires = "mock")]
    pub lenient: bool,
    /// Record live completions into this directory as a fixture set.
    #[arg(long, global = true, value_name = "DIR", conflicts_with = "mock")]
    pub record: Option<PathBuf>,
    /// Directory of prompt template overrides (one JSON file per template).
    #[arg(long, global = true, value_name = "DIR")]
    pub templates: Option<PathBuf>,
    /// Overrides ONTOFORGE_LLM_BASE_URL.
    #[arg(long, global = true, conflicts_with = "mock")]
    pub base_url: Option<String>,
    /// Overrides ONTOFORGE_LLM_MODEL.
    #[arg(long = "model", global = true, conflicts_with = "mock")]
    pub model_id: Option<String>,
    /// Progress and timing on the error stream.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a project from scenario documents.
    Init(InitArgs),
    /// Run, inspect or reopen stages.
    #[command(subcommand)]
    Stage(StageCommand),
    /// Apply review decisions.
    #[command(subcommand)]
    Review(ReviewCommand),
    /// Inspect proposals.
    #[command(subcommand)]
    Proposals(ProposalsCommand),
    /// Structural metrics of the main model.
    Metrics {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run test tiers on the main model; exits 1 unless every test passes.
    Test {
        #[arg(value_enum, default_value_t = TierArg::All)]
        tier: TierArg,
    },
    /// Markdown documentation of the main model.
    Docs {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stakeholder feedback.
    #[command(subcommand)]
    Feedback(FeedbackCommand),
    /// Modelet lifecycle.
    #[command(subcommand)]
    Modelet(ModeletCommand),
    /// Write the main model as Turtle or the documentation as Markdown.
    Export {
        #[arg(value_enum)]
        what: ExportWhat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the review API on a loopback port.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
    /// The revision log.
    Log {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct InitArgs {
    pub name: String,
    /// Scenario text file; repeatable. The file stem becomes the document id.
    #[arg(long = "scenario", required = true, value_name = "FILE")]
    pub scenarios: Vec<PathBuf>,
    /// Turtle file loaded as the initial main model.
    #[arg(long)]
    pub seed: Option<PathBuf>,
    #[arg(long, default_value = "http://example.org/onto#")]
    pub namespace: String,
    #[arg(long, default_value = "ex")]
    pub prefix: String,
    #[arg(long, default_value = "the application domain")]
    pub domain: String,
    /// Timestamps advance one second per log entry from a fixed base, for reproducible runs.
    #[arg(long)]
    pub logical_clock: bool,
}

#[derive(Debug, Subcommand)]
pub enum StageCommand {
    Run {
        #[arg(value_parser = stage)]
        stage: Stage,
    },
    Status,
    Reopen {
        #[arg(value_parser = stage)]
        stage: Stage,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReviewCommand {
    /// Apply a JSON decision list atomically.
    Apply { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum ProposalsCommand {
    List {
        #[arg(long, value_enum)]
        status: Option<StatusArg>,
        #[arg(long, value_parser = stage)]
        stage: Option<Stage>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Subcommand)]
pub enum FeedbackCommand {
    /// Append feedback items from a JSON list.
    Ingest { file: PathBuf },
    /// Run the Feedback stage: theme extraction.
    Summarize,
    /// Turn accepted themes into structural proposals.
    Propose,
}

#[derive(Debug, Subcommand)]
pub enum ModeletCommand {
    List,
    Merge { id: String },
    Revert { id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Model,
    Data,
    Query,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportWhat {
    Ttl,
    Docs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatusArg {
    #[value(alias = "Pending")]
    Pending,
    #[value(alias = "Accepted")]
    Accepted,
    #[value(alias = "Rejected")]
    Rejected,
    #[value(alias = "Edited")]
    Edited,
}
