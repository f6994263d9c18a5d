#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ontoforge_core::fixtures::{henri, Step, UCPO_NS};

pub fn ontoforge(project: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ontoforge"))
        .arg("--project")
        .arg(project)
        .args(args)
        .env_remove("ONTOFORGE_LLM_BASE_URL")
        .env_remove("ONTOFORGE_LLM_API_KEY")
        .env_remove("ONTOFORGE_LLM_MODEL")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Panics with both streams when the exit code differs.
pub fn expect_exit(o: &Output, code: i32, what: &str) {
    assert_eq!(o.status.code(), Some(code), "{what}\nstdout:\n{}\nstderr:\n{}", stdout(o), stderr(o));
}

fn path(p: &Path) -> String {
    p.to_str().expect("utf-8 path").to_string()
}

pub fn init_henri(project: &Path) {
    let mut args = vec!["init".to_string(), henri::NAME.to_string()];
    for s in henri::scenario_paths() {
        args.extend(["--scenario".to_string(), path(&s)]);
    }
    args.extend([
        "--seed".to_string(),
        path(&henri::seed_path()),
        "--namespace".to_string(),
        UCPO_NS.to_string(),
        "--prefix".to_string(),
        "ucpo".to_string(),
        "--domain".to_string(),
        "user context profiles for vehicle sales".to_string(),
        "--logical-clock".to_string(),
    ]);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    expect_exit(&ontoforge(project, &args), 0, "init");
}

/// The command line equivalent of one walkthrough step.
pub fn step_args(step: Step) -> Vec<String> {
    let decisions = |name: &str| path(&henri::decisions_dir().join(format!("{name}.json")));
    let words: Vec<String> = match step {
        Step::Run(stage) => vec!["stage".into(), "run".into(), stage.name().into()],
        Step::Decide(name) => vec!["review".into(), "apply".into(), decisions(name)],
        Step::Merge(id) => vec!["modelet".into(), "merge".into(), id.into()],
        Step::IngestFeedback => vec!["feedback".into(), "ingest".into(), path(&henri::feedback_path())],
        Step::ProposeFromThemes => vec!["feedback".into(), "propose".into()],
        Step::TestAll => vec!["test".into(), "all".into()],
    };
    let mut args = vec!["--mock".to_string(), path(&henri::mock_dir())];
    args.extend(words);
    args
}

pub fn run_cli_steps(project: &Path, steps: &[Step]) {
    for &step in steps {
        let args = step_args(step);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        expect_exit(&ontoforge(project, &args), 0, &format!("{step:?}"));
    }
}

pub fn scratch() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("project");
    (dir, project)
}
