//! `matfin`: experiments on matrix-finite operators.
//!
//! Every subcommand builds a [`RunReport`]. The report is printed as JSON on
//! stdout and written to `--out` when given. Exit status is 0 when every
//! metric passes, 1 when an experiment fails and 2 on usage errors.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matfin::report::RunReport;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "matfin", version, about = "Experiments on matrix-finite operators", arg_required_else_help = true)]
pub struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Report path (for `construct`, the coordinate file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print only the JSON report, without the summary on stderr.
    #[arg(long, global = true)]
    pub json_only: bool,
    /// Also write an SVG plot of the main curve.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build one of the explicit operators and write it in coordinate format.
    Construct(ConstructArgs),
    /// Profile closure laws of sums, products and adjoints.
    AlgebraCheck(TrialArgs),
    /// Operator norm against the line-decomposition bound.
    NormBound(NormArgs),
    /// Best k-sparse approximation error of the averaging columns.
    Distance(DistanceArgs),
    /// Expander filter pipeline for the block projection.
    Expander(ExpanderArgs),
    /// Tail profile and l1 diagnostics of an operator.
    Ghost(GhostArgs),
    /// Extract a compression certified to stay above delta / 2.
    IdealExtract(ExtractArgs),
    /// Operators from group actions, graphs and metric spaces.
    Embed(EmbedArgs),
    /// Certified path from an invertible operator to the identity.
    Homotopy(HomotopyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstructOp {
    /// Averaging isometry.
    V,
    /// Interleaved unitary.
    U,
    /// Block projection.
    P,
    /// Projection in two-by-two matrices over the unitary.
    M2p,
    /// Odd and even shift isometries, stacked side by side.
    Shift,
    /// Compact operator with the averaging isometry as polar part.
    Polar,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub op: ConstructOp,
    #[arg(long, default_value_t = 8)]
    pub blocks: usize,
    /// Window size; defaults to the total size of the blocks.
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TrialArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 128)]
    pub window: usize,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 64)]
    pub window: usize,
    /// Largest entry modulus.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    #[arg(long, default_value_t = 12)]
    pub blocks: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct ExpanderArgs {
    #[arg(long, default_value_t = 32)]
    pub n_max: usize,
    #[arg(long, default_value_t = 6)]
    pub degree: usize,
    #[arg(long, default_value_t = 10)]
    pub s: u32,
}

#[derive(Args, Debug)]
pub struct GhostArgs {
    /// Coordinate file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Report path; same as `--out`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Split point for the product estimate against the input itself.
    #[arg(long)]
    pub n_split: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    /// Coordinate file of a self-adjoint operator.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmbedKind {
    Action,
    Adjacency,
    Band,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[arg(long, value_enum)]
    pub kind: EmbedKind,
    /// Number of points when no input file is given.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Edge list for `adjacency`, metric table for `band`.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Degree of the random regular graph used by `adjacency` without input.
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    /// Band radius.
    #[arg(long, default_value_t = 2)]
    pub radius: u64,
    /// Radius of the second factor in the band product check.
    #[arg(long, default_value_t = 1)]
    pub radius2: u64,
}

#[derive(Args, Debug)]
pub struct HomotopyArgs {
    /// Coordinate file of the invertible operator; a random one is drawn
    /// when omitted.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Window size; the input is padded with the identity up to it.
    #[arg(long)]
    pub window: Option<usize>,
    /// Steps per stage before refinement.
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    /// Profile of the random operator.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Construct(_) => "construct",
            Command::AlgebraCheck(_) => "algebra-check",
            Command::NormBound(_) => "norm-bound",
            Command::Distance(_) => "distance",
            Command::Expander(_) => "expander",
            Command::Ghost(_) => "ghost",
            Command::IdealExtract(_) => "ideal-extract",
            Command::Embed(_) => "embed",
            Command::Homotopy(_) => "homotopy",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let start = Instant::now();
    let mut report = RunReport::new(cli.command.name(), cli.seed);
    if let Err(e) = commands::run(&cli, &mut report) {
        report.error = Some(e.to_string());
    }
    report.wall_time = start.elapsed().as_secs_f64();

    let json = report.to_json();
    print!("{json}");
    if !cli.json_only {
        for m in &report.metrics {
            eprintln!("{} {}: {:e} (bound {:e})", if m.pass { "PASS" } else { "FAIL" }, m.name, m.value, m.bound);
        }
        if let Some(e) = &report.error {
            eprintln!("error: {e}");
        }
    }
    if let Some(path) = commands::report_path(&cli) {
        if let Err(e) = std::fs::write(&path, &json) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
