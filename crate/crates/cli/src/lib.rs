//! Batch experiments over the tensormor core: configuration files, benchmark
//! problems, CSV/JSON artifacts and report comparison.

pub mod compare;
pub mod config;
pub mod error;
pub mod run;

pub use compare::{compare, Comparison};
pub use config::{ExperimentConfig, Method, Problem};
pub use error::{CliError, CliResult};
pub use run::{execute, RunRequest, RunSummary};
