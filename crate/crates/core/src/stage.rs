//! The seven methodology stages, in their fixed order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    ScenarioGlossary,
    CompetencyQuestions,
    ModeletDevelopment,
    TestCaseGeneration,
    ModelRefinement,
    DocumentGeneration,
    Feedback,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::ScenarioGlossary,
        Stage::CompetencyQuestions,
        Stage::ModeletDevelopment,
        Stage::TestCaseGeneration,
        Stage::ModelRefinement,
        Stage::DocumentGeneration,
        Stage::Feedback,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::ScenarioGlossary => "ScenarioGlossary",
            Stage::CompetencyQuestions => "CompetencyQuestions",
            Stage::ModeletDevelopment => "ModeletDevelopment",
            Stage::TestCaseGeneration => "TestCaseGeneration",
            Stage::ModelRefinement => "ModelRefinement",
            Stage::DocumentGeneration => "DocumentGeneration",
            Stage::Feedback => "Feedback",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown stage '{0}'")]
pub struct UnknownStage(pub String);

impl FromStr for Stage {
    type Err = UnknownStage;

    /// Accepts the stage name in any case, with or without `-`/`_` separators.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| *c != '-' && *c != '_').collect::<String>().to_ascii_lowercase();
        Stage::ALL
            .into_iter()
            .find(|st| st.name().to_ascii_lowercase() == norm)
            .ok_or_else(|| UnknownStage(s.to_string()))
    }
}
