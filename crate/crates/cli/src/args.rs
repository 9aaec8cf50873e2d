//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tempus_core::rational::{parse_rational, Rational};

/// Separation used when neither the flag nor the task file gives one.
pub const DEFAULT_EPSILON: &str = "0.001";

fn rational(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "tempus", version, about = "Temporal numeric planning with intermediate conditions and effects")]
pub struct Cli {
    /// Separation between mutex happenings; overrides the task file.
    #[arg(long, global = true, value_parser = rational)]
    pub epsilon: Option<Rational>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a plan.
    Plan(PlanArgs),
    /// Check a plan against a task; prints a JSON report.
    Validate { task: PathBuf, plan: PathBuf },
    /// Emit the SMT-LIB encoding of the first pattern, or a debugging view.
    Encode(EncodeArgs),
    /// Generate a benchmark instance as task JSON.
    Gen(GenArgs),
    /// Run a benchmark suite and print CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    pub task: PathBuf,
    #[arg(long)]
    pub no_rolling: bool,
    #[arg(long, default_value_t = 50)]
    pub max_iterations: usize,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Directory receiving one SMT-LIB transcript per iteration.
    #[arg(long)]
    pub dump_smt: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub task: PathBuf,
    /// Print the snap task in task JSON format.
    #[arg(long, conflicts_with = "dump_arpg")]
    pub dump_snap: bool,
    /// Print the relaxed planning graph layers as JSON.
    #[arg(long)]
    pub dump_arpg: bool,
    #[arg(long)]
    pub no_rolling: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainName {
    Match,
    Shake,
    Pour,
    Pack,
    Painter,
    Instradi,
    OversubLite,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub domain: DomainName,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub bottles: Option<usize>,
    #[arg(long)]
    pub glasses: Option<usize>,
    #[arg(long)]
    pub litres: Option<i64>,
    #[arg(long)]
    pub items: Option<usize>,
    #[arg(long)]
    pub coats: Option<usize>,
    #[arg(long)]
    pub trains: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "smoke")]
    pub suite: String,
    #[arg(long, default_value_t = 10)]
    pub max_iterations: usize,
    /// Per-instance wall-clock limit in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub no_rolling: bool,
}
