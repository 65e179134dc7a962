//! Command-line front end for the `ergodic-mm` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use commands::{execute, Command, ExperimentKind, Run};
pub use config::Config;
pub use error::CliError;
pub use manifest::{RunManifest, SeedSource};
