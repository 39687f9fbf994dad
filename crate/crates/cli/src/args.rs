use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "chargebid", version, about = "Threshold budgets for bidding games with charging")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Exact rational arithmetic or floating point.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact, global = true)]
    pub mode: ModeArg,
    /// Convergence tolerance in approximate mode.
    #[arg(long, default_value_t = 1e-9, global = true)]
    pub eps: f64,
    /// Iteration limit of each fixed-point computation.
    #[arg(long = "max-iter", default_value_t = 1_000_000, global = true)]
    pub max_iter: usize,
    /// Master seed for randomized commands.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Approx,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Threshold vector of a game.
    Solve(SolveArgs),
    /// Finite-horizon thresholds level by level.
    Table(TableArgs),
    /// Plays between a threshold strategy and an adversary.
    Simulate(SimulateArgs),
    /// Smallest charge repair lowering a threshold.
    Repair(RepairArgs),
    /// Bidding game equivalent to a turn-based game.
    Reduce(ReduceArgs),
    /// Optimization model of a game's thresholds.
    Export(ExportArgs),
    /// Certifies a threshold vector and its strategies.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// Game file, or the name of a bundled example such as `fig1a`.
    #[arg(long)]
    pub arena: String,
    /// Objective overriding the file's, as `kind` or `kind:v1,v2`.
    #[arg(long)]
    pub objective: Option<String>,
    /// Objective set, when not given after the kind.
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<String>>,
    /// Horizon or visit count of bounded objectives.
    #[arg(long)]
    pub bound: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub player: u8,
    /// Outer-loop limit of Büchi computations.
    #[arg(long = "max-k", default_value_t = 10_000)]
    pub max_k: usize,
    /// Print ACCEPT when Player 1's threshold at `--vertex` is at most 1/2.
    #[arg(long, requires = "vertex")]
    pub decide: bool,
    #[arg(long)]
    pub vertex: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Plotdata,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = 6)]
    pub horizon: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub player: u8,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AdversaryArg {
    UniformRandom,
    AllIn,
    Copycat,
    Undercut,
    /// Both players follow their threshold strategies.
    None,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Player 1's initial budget.
    #[arg(long)]
    pub b1: String,
    /// Initial vertex; the first vertex by default.
    #[arg(long)]
    pub start: Option<String>,
    /// Player following the threshold strategy.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub player: u8,
    #[arg(long, value_enum, default_value_t = AdversaryArg::UniformRandom)]
    pub adversary: AdversaryArg,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Margin of the undercutting adversary.
    #[arg(long, default_value_t = 0.01)]
    pub undercut: f64,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long)]
    pub vertex: String,
    /// Total charge that may be added.
    #[arg(long)]
    pub budget: String,
    #[arg(long, default_value = "1/2")]
    pub target: String,
    /// Grid step of added charges.
    #[arg(long, default_value = "1/4")]
    pub grid: String,
    /// Most vertices receiving charge.
    #[arg(long, default_value_t = 3)]
    pub support: usize,
    /// Largest number of candidates to enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u128,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Turn-based game file.
    #[arg(long)]
    pub input: PathBuf,
    /// Charge placed at owned vertices.
    #[arg(long, default_value = "2")]
    pub charge: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Milp,
    Etr,
    Buchi,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Chosen from the objective and mechanism when omitted.
    #[arg(long, value_enum)]
    pub format: Option<ExportFormat>,
    /// Ask whether the threshold at this vertex exceeds 1/2.
    #[arg(long)]
    pub query: Option<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Player 1 vector to check instead of the computed one, as a JSON
    /// object from vertex ids to numbers.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Plays per adversary in the strategy certification.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Budget margin above the threshold.
    #[arg(long, default_value_t = 0.01)]
    pub margin: f64,
}
