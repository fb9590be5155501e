use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eba_core::dataset::DEFAULT_MISSING_TOKEN;
use eba_core::Statistic;

#[derive(Debug, Parser)]
#[command(name = "eba", version, about = "Analogy-based software effort estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the effort of one or more new projects.
    Estimate(EstimateArgs),
    /// Leave-one-out evaluation of one method on a dataset.
    Evaluate(EvaluateArgs),
    /// Leave-one-out comparison of LOOCV and DD k selection.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    FixedK,
    Loocv,
    Dd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Mean,
    Median,
}

impl From<StatisticArg> for Statistic {
    fn from(s: StatisticArg) -> Self {
        match s {
            StatisticArg::Mean => Statistic::Mean,
            StatisticArg::Median => Statistic::Median,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Historical projects (CSV with header row).
    #[arg(long)]
    pub dataset: PathBuf,

    /// Schema sidecar: `name,kind[,levels]` lines plus `effort,<column>`.
    #[arg(long)]
    pub schema: PathBuf,

    /// Cell text that marks a missing value (empty cells are always missing).
    #[arg(long, default_value = DEFAULT_MISSING_TOKEN)]
    pub missing_token: String,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Run data-parallel loops on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Dd)]
    pub method: MethodArg,

    /// Neighbor count for `--method fixed-k`.
    #[arg(long)]
    pub k: Option<usize>,

    /// Upper bound of the k search range (default: min(10, n - 2)).
    #[arg(long)]
    pub kmax: Option<usize>,

    #[arg(long, value_enum, default_value_t = StatisticArg::Mean)]
    pub statistic: StatisticArg,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub method: MethodArgs,

    /// CSV of query projects in the dataset's schema (effort column optional).
    #[arg(long, conflicts_with = "set")]
    pub query: Option<PathBuf>,

    /// Inline query feature, repeatable: `--set size=120 --set lang=java`.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,

    /// Dump the historical distance matrix as CSV (17 significant digits).
    #[arg(long)]
    pub dump_matrix: Option<PathBuf>,

    /// Dump the first query's KS statistic against every matrix row as CSV.
    #[arg(long)]
    pub dump_ks: Option<PathBuf>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub method: MethodArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Upper bound of the k search range shared by both methods.
    #[arg(long)]
    pub kmax: Option<usize>,

    #[arg(long, value_enum, default_value_t = StatisticArg::Mean)]
    pub statistic: StatisticArg,

    /// Published results to print alongside (desharnais, maxwell, cocomo-nasa).
    /// Defaults to the dataset file name when it matches one of them.
    #[arg(long)]
    pub reference: Option<String>,

    #[command(flatten)]
    pub output: OutputArgs,
}
