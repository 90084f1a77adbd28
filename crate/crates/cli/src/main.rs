use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

mod commands;
mod document;
mod output;

use output::Format;

/// Largest stage index accepted on the command line.
const MAX_STAGE: i64 = 1 << 16;
/// Largest number of emitted bits for `atom-decode`.
const MAX_BUDGET: i64 = 4096;
/// Overrides the allocation granularity cap used by `invert`.
pub const GRANULARITY_ENV: &str = "SEMIMEASURE_GRANULARITY_CAP";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Precondition(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "semimeasure", version, about = "Exact computations with semi-measures, functionals and tests")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Largest string length (or level) to compute.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=24))]
    depth: u32,

    /// Stage of the approximation to read; stages count from 0.
    #[arg(long, global = true, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=MAX_STAGE))]
    stage: u32,

    /// Number of bits `atom-decode` emits.
    #[arg(long, global = true, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..=MAX_BUDGET))]
    budget: u32,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a document of any type and report the first violation.
    Validate { path: PathBuf },
    /// Recompute the reference constructions and compare with their expected values.
    Examples,
    /// Level masses above a string and the derived measure there.
    Trim {
        path: PathBuf,
        #[arg(long, default_value = "")]
        sigma: String,
    },
    /// Table of the semi-measure a functional induces.
    Induce { path: PathBuf },
    /// A functional whose induced semi-measure matches the input, stage by stage.
    Invert { path: PathBuf },
    /// Follow an atom from a seed; `--stage` is the last stage searched.
    AtomDecode {
        path: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value = "")]
        seed: String,
    },
    /// The pair of functionals built from approximations of a left-c.e. real.
    Shen {
        /// Comma-separated non-decreasing dyadic approximations below 1.
        #[arg(long)]
        omega: Option<String>,
    },
    /// Merge functionals into one that routes input `1^e 0 σ` to the `e`-th.
    Universal {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Per-level status of a test on a finite prefix.
    Passes {
        path: PathBuf,
        #[arg(long, default_value = "")]
        prefix: String,
    },
}

fn run(cli: &Cli) -> Result<(output::Output, u8), CliError> {
    match &cli.command {
        Command::Validate { path } => commands::validate(path),
        Command::Examples => commands::examples(cli.depth),
        Command::Trim { path, sigma } => commands::trim(path, sigma, cli.depth, cli.stage),
        Command::Induce { path } => commands::induce(path, cli.stage, cli.depth),
        Command::Invert { path } => commands::invert(path, cli.stage, cli.depth),
        Command::AtomDecode { path, q, n, seed } => commands::atom_decode(path, q, *n, seed, cli.budget, cli.stage),
        Command::Shen { omega } => commands::shen(omega.as_deref(), cli.depth),
        Command::Universal { paths } => commands::universal(paths),
        Command::Passes { path, prefix } => commands::passes(path, prefix),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(out, code)| {
        output::emit(&out.render(cli.format)?, cli.out.as_deref())?;
        Ok(code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("semimeasure: {e}");
            ExitCode::from(e.code())
        }
    }
}
