//! Command-line front end: CSV ingestion, model fitting, mediation
//! estimation and simulation studies with JSON output.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod input;

use std::io::{Read, Write};

pub use args::{Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, CliResult, ErrorKind};

/// Executes a parsed command line.
pub fn run(cli: Cli, stdin: &mut dyn Read, stdout: &mut dyn Write) -> CliResult<()> {
    let (flags, config_path, command) = match cli.command {
        Command::Fit(a) => {
            let (f, p) = a.into_parts();
            (f, p, commands::fit as fn(&RunConfig, &mut dyn Read, &mut dyn Write) -> CliResult<()>)
        }
        Command::Mediate(a) => {
            let (f, p) = a.into_parts();
            (f, p, commands::mediate_cmd as _)
        }
        Command::Simulate(a) => {
            let (f, p) = a.into_parts();
            (f, p, (|cfg: &RunConfig, _: &mut dyn Read, out: &mut dyn Write| commands::simulate(cfg, out)) as _)
        }
        Command::Generate(a) => {
            let (f, p) = a.into_parts();
            (f, p, (|cfg: &RunConfig, _: &mut dyn Read, out: &mut dyn Write| commands::generate_cmd(cfg, out)) as _)
        }
    };
    let base = match config_path {
        Some(p) => RunConfig::load(&p)?,
        None => RunConfig::default(),
    };
    command(&base.overlay(flags), stdin, stdout)
}
