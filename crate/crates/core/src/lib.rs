pub mod docgen;
pub mod feedback;
pub mod fixtures;
pub mod llm;
pub mod metrics;
pub mod onto;
pub mod pipeline;
pub mod stage;
pub mod testkit;
