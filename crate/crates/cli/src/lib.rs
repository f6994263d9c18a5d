//! Command-line driver and local review API for the ontology pipeline.

pub mod args;
pub mod commands;
pub mod server;
pub mod session;
