//! Command-line front door: generate synthetic graphs, rewire them with one
//! of the optimizers, evaluate exposure and segregation, and benchmark
//! per-rewiring scaling.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use expomin::exposure::ExposureError;
use expomin::io::IoError;
use expomin::optimize::OptimizeError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } => CliError::Runtime(e.to_string()),
            IoError::Parse { .. } | IoError::Invalid { .. } => CliError::Validation(e.to_string()),
        }
    }
}

impl From<OptimizeError> for CliError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Graph(_)
            | OptimizeError::Relevance(_)
            | OptimizeError::InitialQuality { .. }
            | OptimizeError::Exposure(ExposureError::OracleLimit(..)) => {
                CliError::Validation(e.to_string())
            }
            OptimizeError::ZeroBudget => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<ExposureError> for CliError {
    fn from(e: ExposureError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "expomin",
    about = "Reduce expected exposure to harmful content in recommendation graphs by edge rewiring",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph, costs, and optionally relevance rankings
    Generate(commands::generate::GenerateArgs),
    /// Run a rewiring optimizer over a graph
    Rewire(commands::rewire::RewireArgs),
    /// Report exposure, segregation, and safety statistics of a graph
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Time per-rewiring cost across growing synthetic graphs
    Bench(commands::bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate::run(args),
        Command::Rewire(args) => commands::rewire::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Bench(args) => commands::bench::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
