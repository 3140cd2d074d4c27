//! `slide`: generate benchmark Ising models, sample them, reconstruct them
//! from samples and measure how many samples reconstruction needs.

mod commands;
mod manifest;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slide_core::SlideError;

#[derive(Debug, Parser)]
#[command(name = "slide", version, about = "Sparse Ising model reconstruction")]
struct Cli {
    /// Worker threads for node solves and protocol trials.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a benchmark coupling matrix.
    Generate(GenerateArgs),
    /// Draw samples from a model file.
    Sample(SampleArgs),
    /// Estimate a coupling matrix from a samples file.
    Reconstruct(ReconstructArgs),
    /// Compare an estimated model with the true one.
    Evaluate(EvaluateArgs),
    /// Empirical sample complexity across a degree or β grid.
    Sweep(SweepArgs),
    /// Convert a delimited vote matrix into a samples file.
    IngestVotes(IngestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternArg {
    FerroOneWeak,
    MixedTwoWeak,
    FerroOneWeakNegative,
    DegreeDisentangled,
}

impl From<PatternArg> for slide_core::Pattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::FerroOneWeak => slide_core::Pattern::FerroOneWeak,
            PatternArg::MixedTwoWeak => slide_core::Pattern::MixedTwoWeak,
            PatternArg::FerroOneWeakNegative => slide_core::Pattern::FerroOneWeakNegative,
            PatternArg::DegreeDisentangled => slide_core::Pattern::DegreeDisentangled,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Random regular graph: node count and degree.
    #[arg(long, num_args = 2, value_names = ["P", "D"], conflicts_with = "pbsl", required_unless_present = "pbsl")]
    pub rrg: Option<Vec<usize>>,
    /// Periodic square lattice with side L.
    #[arg(long, value_name = "L")]
    pub pbsl: Option<usize>,
    #[arg(long, value_enum, default_value = "ferro-one-weak")]
    pub pattern: PatternArg,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Gibbs burn-in sweeps (default 100·p).
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Gibbs sweeps between recorded samples.
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    /// Draw exactly from the enumerated distribution (p ≤ 20).
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    /// key=value file with any of the options below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Largest neighbourhood size searched.
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Post-symmetrization threshold (defaults to λ/2 when --lambda is set, else 0).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Known minimum coupling magnitude.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Known maximum neighbourhood weight (bounds coefficients at 2γ).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Constant in the splice acceptance threshold.
    #[arg(long)]
    pub sigma_const: Option<f64>,
    /// Sizes without GIC improvement before the size sweep stops; 0 disables.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Recorded in the manifest; the estimator itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-node GIC trace (default `<out>.trace.json`).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub estimate: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Write metrics JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Degree,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Rrg,
    Pbsl,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated grid of degrees (degree axis) or β values (beta axis).
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    #[arg(long, value_enum, default_value = "rrg")]
    pub topology: TopologyArg,
    /// Node count for random regular graphs.
    #[arg(long, default_value_t = 16)]
    pub p: usize,
    /// Degree for the beta axis on random regular graphs.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Lattice side for the beta axis on square lattices.
    #[arg(long, default_value_t = 4)]
    pub l: usize,
    /// Fixed maximum neighbourhood weight (degree axis).
    #[arg(long, default_value_t = 1.2)]
    pub gamma: f64,
    /// Weakest coupling.
    #[arg(long)]
    pub lambda: f64,
    /// Interaction pattern for the beta axis (the degree axis always uses
    /// degree-disentangled).
    #[arg(long, value_enum, default_value = "ferro-one-weak")]
    pub pattern: PatternArg,
    /// Threshold estimates at half the true minimum signal.
    #[arg(long)]
    pub known_lambda: bool,
    #[arg(long, default_value_t = 45)]
    pub trials: usize,
    /// Fraction of trials that must recover the support exactly.
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 100)]
    pub n_start: usize,
    #[arg(long, default_value_t = 1.3)]
    pub grid_factor: f64,
    #[arg(long, default_value_t = 0.05)]
    pub refine_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Long-format trace CSV; an existing file with its summary is resumed.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary JSON (default `<out>.summary.json`).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub patience: usize,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Delimited vote matrix: rows are samples, columns variables.
    #[arg(long)]
    pub input: PathBuf,
    /// key=value file with delimiter, token lists and missing-vote policy.
    #[arg(long)]
    pub format: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Command failure, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or malformed inputs (exit 2).
    Validation(String),
    /// Runtime failure or exhausted budget (exit 3).
    Runtime(String),
}

impl From<SlideError> for Failure {
    fn from(e: SlideError) -> Self {
        match e {
            SlideError::MaxNExceeded { .. }
            | SlideError::BudgetExceeded { .. }
            | SlideError::ConstructionFailed { .. }
            | SlideError::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a, cli.threads),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Sweep(a) => sweep::run(&a, cli.threads),
        Command::IngestVotes(a) => commands::ingest_votes(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
