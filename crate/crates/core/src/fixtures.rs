//! Bundled fixture documents and the scripted Henri walkthrough.
//!
//! Every fixture is authored for this crate; the Henri ABox is built to give
//! five professional-profile models and exactly one dual-context model.

use std::fs;
use std::path::{Path, PathBuf};

use crate::feedback::{ingest_feedback, themes_to_proposals};
use crate::llm::retrieval::Document;
use crate::pipeline::{
    apply_decisions, merge_modelet, run_stage, run_tests, DecisionEntry, Gateway, Model, PipelineError, Project,
    ProjectConfig,
};
use crate::stage::Stage;
use crate::testkit::{CheckId, Tier};

pub const UCPO_NS: &str = "http://vivocaz.fr/ucpo/ns#";
pub const VO_NS: &str = "http://vivocaz.fr/vo/ns#";

pub const UCPO_MINI: &str = include_str!("../fixtures/ucpo-mini.ttl");
pub const HENRI_ABOX: &str = include_str!("../fixtures/henri-abox.ttl");
pub const USERS12: &str = include_str!("../fixtures/users12.ttl");
pub const QB1_CARS: &str = include_str!("../fixtures/qb1-cars.ttl");
pub const TABLE4_SYNTH: &str = include_str!("../fixtures/table4-synth.ttl");

pub const QB1: &str = include_str!("../fixtures/queries/qb1.rq");
pub const QB2: &str = include_str!("../fixtures/queries/qb2.rq");
pub const QB3: &str = include_str!("../fixtures/queries/qb3.rq");
pub const DUAL_CONTEXT: &str = include_str!("../fixtures/queries/dual-context.rq");

pub const DEFECT_BASE: &str = include_str!("../fixtures/defects/clean.ttl");

/// Each seeded-defect document with the one check it must trip.
pub const DEFECTS: [(CheckId, &str, &str); 6] = [
    (CheckId::MissingDomain, "missing-domain", include_str!("../fixtures/defects/missing-domain.ttl")),
    (CheckId::MissingRange, "missing-range", include_str!("../fixtures/defects/missing-range.ttl")),
    (CheckId::SubclassCycle, "subclass-cycle", include_str!("../fixtures/defects/subclass-cycle.ttl")),
    (CheckId::UntypedIndividual, "untyped-individual", include_str!("../fixtures/defects/untyped-individual.ttl")),
    (CheckId::OrphanProperty, "orphan-property", include_str!("../fixtures/defects/orphan-property.ttl")),
    (CheckId::MissingLabel, "missing-label", include_str!("../fixtures/defects/missing-label.ttl")),
];

/// Every bundled Turtle document, by name.
pub fn turtle_documents() -> Vec<(&'static str, &'static str)> {
    let mut docs = vec![
        ("ucpo-mini", UCPO_MINI),
        ("henri-abox", HENRI_ABOX),
        ("users12", USERS12),
        ("qb1-cars", QB1_CARS),
        ("table4-synth", TABLE4_SYNTH),
        ("henri-seed", henri::SEED),
        ("defect-base", DEFECT_BASE),
    ];
    docs.extend(DEFECTS.iter().map(|(_, name, text)| (*name, *text)));
    docs
}

/// Source directory of the fixtures; valid while the crate sources exist.
pub fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub mod henri {
    use super::*;

    pub const SEED: &str = include_str!("../fixtures/henri/seed.ttl");
    pub const FEEDBACK: &str = include_str!("../fixtures/henri/feedback.json");
    pub const SCENARIOS: [(&str, &str); 3] = [
        ("henri", include_str!("../fixtures/henri/scenarios/henri.md")),
        ("dealership", include_str!("../fixtures/henri/scenarios/dealership.md")),
        ("context", include_str!("../fixtures/henri/scenarios/context.md")),
    ];
    pub const NAME: &str = "henri";

    pub fn scenarios() -> Vec<Document> {
        SCENARIOS.iter().map(|(id, text)| Document::from_text(id, text)).collect()
    }

    /// Logical clock, so replays produce identical timestamps.
    pub fn config() -> ProjectConfig {
        ProjectConfig {
            namespace: UCPO_NS.into(),
            prefix: "ucpo".into(),
            domain: "user context profiles for vehicle sales".into(),
            clock: ProjectConfig::logical_clock(),
            ..ProjectConfig::default()
        }
    }

    pub fn seed() -> Model {
        Model::from_turtle(SEED).expect("bundled seed parses")
    }

    pub fn new_project() -> Result<Project, PipelineError> {
        Project::new(NAME, scenarios(), config(), Some(seed()))
    }

    pub fn mock_dir() -> PathBuf {
        dir().join("henri").join("mock")
    }

    pub fn decisions_dir() -> PathBuf {
        dir().join("henri").join("decisions")
    }

    pub fn feedback_path() -> PathBuf {
        dir().join("henri").join("feedback.json")
    }

    pub fn scenario_paths() -> Vec<PathBuf> {
        SCENARIOS.iter().map(|(id, _)| dir().join("henri").join("scenarios").join(format!("{id}.md"))).collect()
    }

    pub fn seed_path() -> PathBuf {
        dir().join("henri").join("seed.ttl")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Run(Stage),
    /// Applies the named decision batch.
    Decide(&'static str),
    Merge(&'static str),
    IngestFeedback,
    ProposeFromThemes,
    TestAll,
}

/// All seven stages from an empty Henri project to a tested, documented model.
pub const HENRI_STEPS: &[Step] = &[
    Step::Run(Stage::ScenarioGlossary),
    Step::Decide("01-glossary"),
    Step::Run(Stage::CompetencyQuestions),
    Step::Decide("02-questions"),
    Step::Run(Stage::ModeletDevelopment),
    Step::Decide("03-modelet"),
    Step::Run(Stage::TestCaseGeneration),
    Step::Decide("04-tests"),
    Step::Merge("modelet-1"),
    Step::Run(Stage::ModelRefinement),
    Step::Decide("05-refinement"),
    Step::Run(Stage::DocumentGeneration),
    Step::Decide("06-docs"),
    Step::IngestFeedback,
    Step::Run(Stage::Feedback),
    Step::Decide("07-themes"),
    Step::ProposeFromThemes,
    Step::Decide("08-theme-proposals"),
    Step::TestAll,
];

/// Supplies a named decision batch given the current project.
pub type DecisionSource<'a> = dyn FnMut(&str, &Project) -> Result<Vec<DecisionEntry>, PipelineError> + 'a;

/// Executes `steps`; `decide` supplies each named decision batch given the
/// project state at that point.
pub fn run_steps(
    project: &mut Project,
    steps: &[Step],
    gateway: Gateway<'_>,
    feedback: &str,
    decide: &mut DecisionSource<'_>,
) -> Result<(), PipelineError> {
    for step in steps {
        match *step {
            Step::Run(stage) => {
                run_stage(project, stage, gateway)?;
            }
            Step::Decide(name) => {
                let entries = decide(name, project)?;
                apply_decisions(project, &entries)?;
            }
            Step::Merge(id) => {
                merge_modelet(project, id)?;
            }
            Step::IngestFeedback => {
                ingest_feedback(project, feedback)?;
            }
            Step::ProposeFromThemes => {
                themes_to_proposals(project, gateway)?;
            }
            Step::TestAll => {
                run_tests(project, &[Tier::Model, Tier::Data, Tier::Query])?;
            }
        }
    }
    Ok(())
}

/// Reads `<dir>/<name>.json` as a decision list.
pub fn read_decisions(dir: &Path, name: &str) -> Result<Vec<DecisionEntry>, PipelineError> {
    let path = dir.join(format!("{name}.json"));
    let text = fs::read_to_string(&path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::ParseError {
        line: e.line(),
        column: e.column(),
        message: format!("{}: {e}", path.display()),
    })
}
