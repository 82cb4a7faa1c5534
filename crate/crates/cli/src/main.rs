//! `saga`: run the reference models, compare Gather paths, report degree
//! statistics and project profiles onto device models.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "saga", version, about = "Four-stage GNN inference engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a model and print its per-stage profile.
    Run(RunArgs),
    /// Run a model with and without Gather fusion and compare.
    FusionCompare(FusionArgs),
    /// In-degree histogram and predicted LSTM Gather invocations.
    DegreeReport(DegreeArgs),
    /// Project a profile CSV onto device models.
    Project(ProjectArgs),
    /// Print built-in dataset sizes, optionally checking a loaded file.
    Meta(MetaArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FusionArg {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GruInputArg {
    Concat,
    Gather,
}

#[derive(Args, Clone, Debug)]
pub struct DataArgs {
    /// Edge-list file, or a built-in dataset name for a synthetic stand-in.
    #[arg(
        long,
        conflicts_with = "synthetic",
        required_unless_present = "synthetic"
    )]
    pub dataset: Option<String>,
    /// Generator string: powerlaw:n=..,avg_deg=..[,alpha=..], uniform:n=..,m=.., like:<name>.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Keep edge-list edges one-way instead of adding each reversed.
    #[arg(long)]
    pub directed: bool,
    /// Read a third edge-type column from the edge list.
    #[arg(long)]
    pub typed: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug)]
pub struct ModelArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Input feature width for generated features.
    #[arg(long, default_value_t = 32)]
    pub in_dim: usize,
    /// Output width; defaults to the hidden width.
    #[arg(long)]
    pub out_dim: Option<usize>,
    /// Feature matrix file (CSV or whitespace); random features otherwise.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// GCN: symmetric degree normalization.
    #[arg(long)]
    pub gcn_norm: bool,
    /// GGNN: GRU input is [gathered, vertex] (concat) or the gathered vector.
    #[arg(long, value_enum, default_value_t = GruInputArg::Concat)]
    pub ggnn_gru_input: GruInputArg,
    /// GGNN: sum messages over out-edges as well as in-edges.
    #[arg(long)]
    pub ggnn_all_edges: bool,
    #[arg(long)]
    pub load_params: Option<PathBuf>,
    #[arg(long)]
    pub dump_params: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Gather fusion; GraphSAGE defaults to off, every other model to on.
    #[arg(long, value_enum)]
    pub fusion: Option<FusionArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FusionArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Runs per path; the fastest Gather time of each is compared.
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DegreeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Also run GraphSAGE and report the measured Gather invocations.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// Profile CSV written by `saga run --format csv`.
    #[arg(long)]
    pub profile: PathBuf,
    /// Device file (key = value) or builtin:tpu-like|gpu-like|host. Repeatable.
    #[arg(long = "device", required = true)]
    pub devices: Vec<String>,
    /// Host model; the built-in host if omitted.
    #[arg(long)]
    pub host: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct MetaArgs {
    /// Only this dataset.
    #[arg(long)]
    pub name: Option<String>,
    /// Edge list to compare against the named dataset's sizes.
    #[arg(long, requires = "name")]
    pub check: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    if let Err(e) = commands::init_threads() {
        eprintln!("error: {}", one_line(&e.to_string()));
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::FusionCompare(a) => commands::fusion_compare(&a),
        Command::DegreeReport(a) => commands::degree_report(&a),
        Command::Project(a) => commands::project(&a),
        Command::Meta(a) => commands::meta(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}
