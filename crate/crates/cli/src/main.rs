//! `gifs`: render attractors of generalized iterated function systems.
//!
//! Exit codes: 0 success, 1 configuration error, 2 certification failure
//! (contraction, range or gap verification), 3 tuple budget exhausted
//! (partial outputs are still written).

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gifs::DEFAULT_TUPLE_BUDGET;

#[derive(Parser, Debug)]
#[command(name = "gifs", version, about = "Deterministic and grid algorithms for GIFS attractors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one algorithm and write the image, stats and certificates.
    Run(RunArgs),
    /// Run two configurations on the same system and compare them.
    Compare(CompareArgs),
    /// Tabulate the grid/deterministic cost ratio over a geometric eps range.
    Cost(CostArgs),
    /// Print a grid schedule, one resolution per line.
    Schedule(ScheduleArgs),
    /// Print a built-in system in `.gifs` format.
    Export(ExportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// Built-in example system (A, B or C).
    #[arg(long, conflicts_with = "system", required_unless_present = "system")]
    pub builtin: Option<String>,
    /// Path to a `.gifs` system file.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Compose file-defined maps with the projection onto the cube instead of
    /// rejecting maps that leave it.
    #[arg(long)]
    pub project_range: bool,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Initial set as `x1,y1;x2,y2;...` (default: the cube center).
    #[arg(long)]
    pub seed: Option<String>,
    /// Maximum number of map evaluations for the whole run.
    #[arg(long, env = "GIFS_BUDGET", default_value_t = DEFAULT_TUPLE_BUDGET)]
    pub budget: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Det,
    Grid,
    GridRound,
    MemoryP,
}

#[derive(Args, Debug, Clone)]
pub struct AlgoArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Operator applications; for schedules with their own length this
    /// selects a prefix.
    #[arg(long)]
    pub steps: Option<usize>,
    /// `quad`, `optimal:<eps>`, `const:<n>` or `file:<path>`.
    #[arg(long)]
    pub schedule: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ImageArgs {
    #[arg(long, default_value_t = 800)]
    pub width: usize,
    #[arg(long, default_value_t = 800)]
    pub height: usize,
    /// Axis pair to render for M >= 3, as `i,j`.
    #[arg(long, default_value = "0,1")]
    pub axes: String,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub algo: AlgoArgs,
    /// Measure every grid step's snapping gap against its bound.
    #[arg(long)]
    pub verify: bool,
    /// Output image (binary PPM).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub image: ImageArgs,
    /// Per-step stats CSV.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Gap certificate CSV (requires --verify).
    #[arg(long, requires = "verify")]
    pub certificate: Option<PathBuf>,
    /// Record step durations in the stats CSV (makes it non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub a_algo: Algo,
    #[arg(long)]
    pub a_steps: Option<usize>,
    #[arg(long)]
    pub a_schedule: Option<String>,
    #[arg(long, value_enum)]
    pub b_algo: Algo,
    #[arg(long)]
    pub b_steps: Option<usize>,
    #[arg(long)]
    pub b_schedule: Option<String>,
    /// Deterministic run of this many steps used as a stand-in for the attractor.
    #[arg(long)]
    pub reference_steps: Option<usize>,
    /// Comparison CSV (`quantity,value`); stdout if omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub a_out: Option<PathBuf>,
    #[arg(long)]
    pub b_out: Option<PathBuf>,
    #[command(flatten)]
    pub image: ImageArgs,
}

#[derive(Args, Debug)]
pub struct CostArgs {
    /// Take L, p, M and C from a built-in system.
    #[arg(long, conflicts_with_all = ["maps", "order", "dim", "contraction"])]
    pub builtin: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub x0: u64,
    #[arg(long, required_unless_present = "builtin")]
    pub maps: Option<u64>,
    #[arg(long, required_unless_present = "builtin")]
    pub order: Option<usize>,
    #[arg(long, required_unless_present = "builtin")]
    pub dim: Option<usize>,
    #[arg(long, required_unless_present = "builtin")]
    pub contraction: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub eps_start: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps_factor: f64,
    #[arg(long, default_value_t = 6)]
    pub count: usize,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// `quad`, `optimal:<eps>`, `const:<n>` or `file:<path>`.
    #[arg(long)]
    pub schedule: String,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub builtin: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Cost(args) => commands::cost(&args),
        Command::Schedule(args) => commands::schedule(&args),
        Command::Export(args) => commands::export(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
