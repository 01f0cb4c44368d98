mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fuselab_core::ingest::{JoinPolicy, StrategyChoice, WeightSource};
use fuselab_core::ErrorKind;

/// Late-fusion ensembling and cross-dataset evaluation of detector scores.
#[derive(Parser, Debug)]
#[command(name = "fuselab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that every score file parses and joins cleanly
    Validate(InputArgs),
    /// Write synthetic score files and a manifest
    Synth(SynthArgs),
    /// Write fused ensemble scores for every dataset
    Fuse(RunArgs),
    /// Compute AUROC/AUPRC for members and ensembles, plus curve data
    Evaluate(RunArgs),
    /// Rank models per dataset and emit bump-chart data
    Rank(RunArgs),
    /// Write the full markdown and JSON report
    Report(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Run manifest (JSON)
    #[arg(long, required_unless_present = "metrics_table")]
    manifest: Option<PathBuf>,
    /// Pre-computed `model,dataset,auroc,auprc` table; bypasses score files
    #[arg(long, conflicts_with = "manifest")]
    metrics_table: Option<PathBuf>,
    #[arg(long, default_value = "strict", value_parser = parse_join)]
    join_policy: JoinPolicy,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// uniform | weighted | both (default: the manifest's setting)
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<StrategyChoice>,
    /// auroc | chance-adjusted | accuracy | file:<path> (default: the manifest's setting)
    #[arg(long, value_parser = parse_weights)]
    weights: Option<WeightSource>,
    /// Decision threshold for accuracy-based weights
    #[arg(long)]
    accuracy_threshold: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = "synthetic")]
    dataset: String,
    #[arg(long, default_value_t = 1000)]
    n_pos: usize,
    #[arg(long, default_value_t = 1000)]
    n_neg: usize,
    /// Comma-separated target AUROC per detector
    #[arg(long, value_delimiter = ',', default_value = "0.65,0.7,0.75,0.8,0.85,0.9")]
    target_auroc: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write a validation split generated with this seed
    #[arg(long)]
    validation_seed: Option<u64>,
    /// Add the dataset to an existing manifest in the output directory
    #[arg(long)]
    append: bool,
}

fn parse_join(s: &str) -> Result<JoinPolicy, String> {
    s.parse().map_err(|e: fuselab_core::Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<StrategyChoice, String> {
    s.parse().map_err(|e: fuselab_core::Error| e.to_string())
}

fn parse_weights(s: &str) -> Result<WeightSource, String> {
    s.parse().map_err(|e: fuselab_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Validate(a) => commands::validate(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Fuse(a) => commands::fuse(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Rank(a) => commands::rank(&a),
        Command::Report(a) => commands::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => 1,
                ErrorKind::Io => 2,
                ErrorKind::Invariant => 3,
            })
        }
    }
}
