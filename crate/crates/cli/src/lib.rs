//! The `ee` command-line driver: experiment flags and config files,
//! validation, cached runs and CSV/JSON output.

pub mod args;
pub mod experiment;
pub mod output;
pub mod run;

pub use args::{Cli, Command, MethodArg, Params, SelftestArgs};
pub use experiment::{validate, Diagnostics, ExperimentSpec, Kind};
pub use run::{execute, main_with, selftest, CliError};
