//! Command-line frontend: dataset ingestion, polytope build/query
//! commands, report emission, and qubit mesh export.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod mesh;
pub mod report;

pub use error::CliError;
