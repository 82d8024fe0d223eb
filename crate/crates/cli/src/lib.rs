//! Command-line front end: batch runs and the HTTP server.

pub mod pipeline;
pub mod plots;
pub mod spec;

pub use pipeline::{run, CliError, Intervention, RunConfig, RunOutput};
