//! Command-line front end for `quake-lab-core`: config parsing, sequence
//! expressions, orchestration and report files.

pub mod config;
pub mod expr;
pub mod report;
pub mod run;

pub use run::{run, Args, CliError, Command, Outcome};
