//! Experiment harness: configuration, the experiment catalog and the run
//! driver that writes reports, tables and a manifest.

#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod config;
pub mod error;
pub mod experiments;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use run::{run, verify_dir, RunOptions, RunSummary};
