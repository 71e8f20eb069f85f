//! Batch front end: runs either pipeline stage, the baselines and
//! supervised cross-validation, and writes result tables.

pub mod commands;
pub mod config;
pub mod error;
pub mod oracle;
pub mod results;

pub use commands::{cmd_align, cmd_localize, cmd_stats, cmd_supervised, cmd_synth};
pub use config::{Method, RunConfig, SupervisedConfig};
pub use error::{CliError, ExitCode, Result};
pub use oracle::cmd_oracle_check;
pub use results::ResultRow;
