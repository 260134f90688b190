//! `mergepipe`: generate synthetic deals, run a framework or baseline, and
//! search hyperparameters. Exit codes: 0 success, 1 I/O failure, 2 invalid
//! configuration, 3 pipeline failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod artifacts;
mod commands;
mod error;

#[derive(Parser)]
#[command(name = "mergepipe", version, about = "Takeover-outcome prediction pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic deal universe and write it as CSV.
    Generate(GenerateArgs),
    /// Fit one framework or baseline and evaluate it on the test split.
    Run(RunArgs),
    /// Seeded hyperparameter search, ranked on a temporal holdout.
    Search(SearchArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Generator settings (JSON); defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; the schema and manifest are written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameworkArg {
    F1,
    F2,
    F3,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Logit,
    WeightedLogit,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Recall,
    Accuracy,
    F1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Random,
    Grid,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("model").required(true).args(["framework", "baseline"])))]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub framework: Option<FrameworkArg>,
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    /// Deals CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Run config (JSON): framework settings plus an optional `split`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset schema; defaults to `<data stem>.schema.json`.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct SearchArgs {
    /// Search space (JSON): candidate lists per field.
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "recall")]
    pub objective: ObjectiveArg,
    #[arg(long, value_enum, default_value = "random")]
    pub strategy: StrategyArg,
    #[arg(long, value_enum)]
    pub framework: Option<FrameworkArg>,
    /// Base run config; searched fields override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Share of the latest training deals used to rank trials.
    #[arg(long, default_value_t = 0.1)]
    pub validation_fraction: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, result) = match &cli.command {
        Command::Generate(a) => ("generate", commands::generate(a)),
        Command::Run(a) => ("run", commands::run(a)),
        Command::Search(a) => ("search", commands::search(a)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mergepipe {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
