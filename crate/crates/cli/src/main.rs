//! `langlab`: dataset generation, training, grid search, construction
//! verification, visualization export and table regeneration.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use langlab::lang::LanguageId;

use config::Family;

#[derive(Parser, Debug)]
#[command(name = "langlab", version, about = "Formal-language recognition experiments for self-attention networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags every command accepts. Flag values override the config file.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed of every random choice the command makes.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output location.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the training split and length bins of a language.
    Generate(GenerateArgs),
    /// Train one model on a generated dataset.
    Train(TrainArgs),
    /// Run a hyperparameter grid on a generated dataset.
    Grid(GridArgs),
    /// Check the exact constructions and the impossibility properties.
    Verify(VerifyArgs),
    /// Export attention and correlation data for a checkpoint.
    Viz(VizArgs),
    /// Rebuild the result tables from run files.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Catalog id (see the list below).
    pub language: Option<String>,
    #[arg(long)]
    pub train_size: Option<usize>,
    #[arg(long)]
    pub bin_size: Option<usize>,
    #[arg(long)]
    pub n_bins: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Dataset directory.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub language: Option<String>,
    /// Model label, e.g. `transformer-d16-h4-l1-masking` or `lstm-h8-l1`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub language: Option<String>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Largest number of configurations to run.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Use the full search space instead of the desk subset.
    #[arg(long)]
    pub full: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub save_checkpoints: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Exhaustive length bound for every suite.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Random words per suite.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub random_max_len: Option<usize>,
    /// Random models per neural property suite.
    #[arg(long)]
    pub models: Option<usize>,
    /// Flip an embedding sign of the Shuffle-1 construction.
    #[arg(long, hide = true)]
    pub corrupt_embedding: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct VizArgs {
    /// Checkpoint written by `train` or `grid --save-checkpoints`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub language: Option<String>,
    /// Take the analysed words from bin 0 of this dataset.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Number of words analysed.
    #[arg(long)]
    pub words: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory searched recursively for run and grid files.
    #[arg(long, default_value = "results")]
    pub results: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

/// Raised when a command ran to completion but its checks failed.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn catalog_help() -> String {
    let mut s = String::from("Languages:\n");
    for id in LanguageId::catalog() {
        let class = id.spec().map(|spec| spec.class().to_string()).unwrap_or_default();
        s.push_str(&format!("  {:<14} {class}\n", id.to_string()));
    }
    s.push_str("  boolexp:<op><arity>,...  custom BoolExp operator set, e.g. boolexp:∼1,∧2\n");
    s.push_str("\nExit codes: 0 success, 1 verification failure, 2 usage or input error.");
    s
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let help = catalog_help();
    let matches = Cli::command()
        .after_help(help.clone())
        .mut_subcommand("generate", |c| c.after_help(help))
        .get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Train(a) => commands::train(a),
        Command::Grid(a) => commands::grid(a),
        Command::Verify(a) => commands::verify(a),
        Command::Viz(a) => commands::viz(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<CheckFailed>() => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
