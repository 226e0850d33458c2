//! Command-line surface for `covertree-core`: configuration, artifact
//! formats and subcommands.

// `!(x > 0.0)` deliberately rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod records;

use std::ffi::OsString;

pub use config::{parse_args, Command, ExperimentConfig};
pub use error::{CliError, Result};

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 runtime or check failure, 2 usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = covertree_core::harness::configure_threads_from_env()
        .map_err(|e| CliError::Usage(e.to_string()))
        .and_then(|_| parse_args(argv))
        .and_then(|cfg| commands::execute(&cfg));
    match outcome {
        Ok(()) => 0,
        Err(CliError::Info(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            let text = e.to_string();
            if text.starts_with("error") {
                eprint!("{text}");
            } else {
                eprintln!("error: {text}");
            }
            e.exit_code()
        }
    }
}
