//! Project file persistence: write to a temporary file, then rename.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{PipelineError, Project};

pub const PROJECT_FILE: &str = "project.json";
pub const SCHEMA_VERSION: u32 = 1;
const TEMP_FILE: &str = "project.json.tmp";

#[derive(Serialize)]
struct FileOut<'a> {
    schema_version: u32,
    project: &'a Project,
}

#[derive(Deserialize)]
struct FileIn {
    #[allow(dead_code)]
    schema_version: u32,
    project: Project,
}

fn encode(project: &Project) -> Result<String, PipelineError> {
    let mut text = serde_json::to_string_pretty(&FileOut { schema_version: SCHEMA_VERSION, project })
        .map_err(|e| PipelineError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// The canonical file is replaced only by an atomic rename of a fully
/// written and synced temporary file.
pub fn save_project(project: &Project, dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir)?;
    let text = encode(project)?;
    let tmp = dir.join(TEMP_FILE);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(text.as_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, dir.join(PROJECT_FILE))?;
    Ok(())
}

/// Simulates a crash after writing `fraction` of the temporary file.
#[doc(hidden)]
pub fn write_interrupted(project: &Project, dir: &Path, fraction: f64) -> Result<(), PipelineError> {
    let text = encode(project)?;
    let cut = ((text.len() as f64) * fraction.clamp(0.0, 1.0)) as usize;
    fs::write(dir.join(TEMP_FILE), &text.as_bytes()[..cut])?;
    Ok(())
}

pub fn load_project(dir: &Path) -> Result<Project, PipelineError> {
    let text = fs::read_to_string(dir.join(PROJECT_FILE))?;
    let corrupt = |e: serde_json::Error| PipelineError::CorruptProject {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    let doc: Value = serde_json::from_str(&text).map_err(corrupt)?;
    match doc.get("schema_version").and_then(Value::as_u64) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(found) => return Err(PipelineError::SchemaVersionMismatch { found, expected: SCHEMA_VERSION }),
        None => {
            return Err(PipelineError::CorruptProject { line: 1, column: 1, message: "missing schema_version".into() })
        }
    }
    let file: FileIn = serde_json::from_str(&text).map_err(corrupt)?;
    Ok(file.project)
}
