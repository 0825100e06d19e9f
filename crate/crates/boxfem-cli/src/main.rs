//! `boxfem`: staged solid-FE shear-lag analysis of box-girder bridges.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 numerical
//! failure (mesh, solver, staging or balance-check problems).

mod commands;
mod config;
mod output;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad inputs: config file problems, unwritable paths, usage.
    Config(Vec<String>),
    /// The analysis itself failed.
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(messages) => write!(f, "{}", messages.join("; ")),
            CliError::Numerical(message) => write!(f, "{message}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "boxfem",
    version,
    about = "Staged-construction solid finite-element shear-lag analysis of \
             single-cell box-girder rigid-frame bridges"
)]
struct Cli {
    /// JSON configuration file; omitted runs the built-in default bridge.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for CSV and VTK files.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads for sweep members.
    #[arg(long, global = true, value_name = "N", default_value_t = 4)]
    threads: usize,

    /// Also write VTK snapshots (per stage and final state).
    #[arg(long, global = true)]
    vtk: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Staged permanent-load analysis with shear-lag profiles at the
    /// reporting cuts.
    Analyze,
    /// Truck placements at each reporting cut on the finished bridge.
    LiveLoad,
    /// Parameter study over the box width-to-depth ratio.
    SweepAspect,
    /// Parameter study over the main span.
    SweepSpan,
    /// Closed-form thin-wall shear-lag profiles for the mid section.
    Analytic,
    /// Build the mesh and print its quality report.
    ValidateMesh,
    /// Dump cross-section polygons and midlines as CSV.
    DumpSection,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = commands::load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Analyze => commands::analyze(&cfg, &cli.out, cli.vtk),
        Command::LiveLoad => commands::live_load(&cfg, &cli.out),
        Command::SweepAspect => {
            commands::sweep(&cfg, &cli.out, cli.threads, commands::SweepKind::Aspect)
        }
        Command::SweepSpan => {
            commands::sweep(&cfg, &cli.out, cli.threads, commands::SweepKind::Span)
        }
        Command::Analytic => commands::analytic(&cfg, &cli.out),
        Command::ValidateMesh => commands::validate_mesh_cmd(&cfg),
        Command::DumpSection => commands::dump_section(&cfg, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(messages)) => {
            for m in &messages {
                eprintln!("error: {m}");
            }
            ExitCode::from(1)
        }
        Err(CliError::Numerical(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
