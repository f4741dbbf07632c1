//! Command-line front end: configuration, staged runs with manifests, and
//! study reports.

pub mod args;
pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use manifest::RunManifest;
pub use pipeline::run_pipeline;
