//! Rebuilding graphs from the revision log.

use std::collections::BTreeMap;

use ontoforge_rdf::Graph;

use super::{graph_from_lines, PipelineError, Project, MAIN_TARGET};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayedModel {
    pub main: Graph,
    pub modelets: BTreeMap<String, Graph>,
}

/// Applies every logged delta in order, starting from empty graphs.
pub fn replay_model(project: &Project) -> Result<ReplayedModel, PipelineError> {
    let mut out = ReplayedModel::default();
    for entry in &project.log {
        let Some(delta) = &entry.delta else { continue };
        let graph = if delta.target == MAIN_TARGET {
            &mut out.main
        } else {
            out.modelets.entry(delta.target.clone()).or_default()
        };
        let parse = |lines: &[String]| {
            graph_from_lines(lines).map_err(|e| PipelineError::Precondition(format!("log entry {}: {e}", entry.seq)))
        };
        for t in parse(&delta.removed)?.iter() {
            graph.remove(t);
        }
        graph.extend(parse(&delta.added)?.iter().cloned());
    }
    Ok(out)
}
