//! Command-line front end for `scorelab-core`.
//!
//! * `scorelab score` evaluates one (possibly corrected) score and prints a JSON line;
//! * `scorelab experiment` runs a Monte Carlo experiment from a JSON config and
//!   writes means and variances per score stream (CSV or JSON);
//! * `scorelab density` writes density curves of the score streams as long-format CSV.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numeric domain
//! error, 4 I/O error.

pub mod args;
pub mod config_file;
mod error;
pub mod format;
pub mod run_cmd;
pub mod score_cmd;

use clap::Parser;

pub use error::{CliError, CliResult};

use args::{Cli, Command};

pub fn dispatch(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Score(a) => score_cmd::run(a),
        Command::Experiment(a) => run_cmd::run_experiment(a),
        Command::Density(a) => run_cmd::run_density(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            eprintln!("scorelab: {e}");
            e.exit_code()
        }
    }
}
