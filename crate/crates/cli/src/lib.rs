//! The `esla` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 runtime abort.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod table;

pub use config::{RunArgs, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    /// Classifies a library error raised while preparing or running a
    /// command.
    pub fn from_core(e: esla::Error) -> Self {
        use esla::Error as E;
        match e {
            E::Parse { .. }
            | E::Io { .. }
            | E::EmptyDataset
            | E::MissingLabels
            | E::TooFewPatterns { .. }
            | E::TooFewPairs { .. } => CliError::Data(e.to_string()),
            E::NonFinite(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (kind, m) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Data(m) => ("data", m),
            CliError::Runtime(m) => ("runtime", m),
        };
        write!(f, "{kind} error: {m}")
    }
}

impl std::error::Error for CliError {}

#[derive(Parser, Debug)]
#[command(
    name = "esla",
    version,
    about = "Train feedforward networks with Rprop, HLS and ESLA"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one network and write its report
    Train(CommandArgs),
    /// Run many seeded trials of several algorithms and summarize them
    Bench(CommandArgs),
    /// Benchmark one algorithm over a grid of q values
    Sweep(CommandArgs),
    /// Trace optimizer trajectories on a two-parameter function
    Landscape(CommandArgs),
    /// Check a PROBEN1 file and print its layout
    ValidateData(CommandArgs),
}

#[derive(clap::Args, Debug)]
pub struct CommandArgs {
    /// key=value file of settings; flags take precedence over it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

impl CommandArgs {
    /// Flags layered over the config file, if any.
    pub fn layered(&self) -> Result<RunArgs, CliError> {
        let file = match &self.config {
            Some(path) => RunArgs::from_file(path)?,
            None => RunArgs::default(),
        };
        Ok(self.run.clone().over(file))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Train(a) => commands::train(a.layered()?),
        Command::Bench(a) => commands::bench(a.layered()?),
        Command::Sweep(a) => commands::sweep(a.layered()?),
        Command::Landscape(a) => commands::landscape(a.layered()?),
        Command::ValidateData(a) => commands::validate_data(a.layered()?),
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("esla: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
