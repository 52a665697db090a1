//! Batch command-line interface.
//!
//! Every command reads newline-delimited JSON records from `--input` (or
//! standard input), writes records to `--output` (or standard output) and
//! prints one summary line per stage to standard error. Output files are
//! written through a temporary file and only appear on success.
//!
//! Record fields read by the commands:
//!
//! | path                                    | used by                         |
//! |-----------------------------------------|---------------------------------|
//! | `text`                                  | every stage                     |
//! | `id`                                    | dedup, chunk seeding, kappa     |
//! | `url`                                   | metrics recall                  |
//! | `eai_taxonomy.<field>.primary.code`     | filter, metrics kappa/nmi       |
//! | `eai_taxonomy.<field>.secondary.code`   | filter, metrics kappa           |
//! | `quality_signals.rps_doc_*`             | written by signals, read by quality rules and filters |
//! | `scores.<name>`                         | filter                          |
//!
//! Exit status: 0 on success, 1 for configuration errors (bad flags, config
//! file, missing referenced files), 2 for data errors (malformed records,
//! reported with their line number).

pub mod cli;
pub mod commands;
pub mod config;
pub mod engine;
pub mod error;
pub mod io;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::execute(parsed.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
