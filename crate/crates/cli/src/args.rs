use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heatsample_core::rng::DEFAULT_SEED;
use heatsample_core::sampling::DistributionChoice;
use heatsample_core::spectral::FAST_HEAT_DT;
use serde::Serialize;

/// Sampling and recovery of diffusing sparse graph signals.
///
/// Every option may also be given in a `--config` file of `key = value`
/// lines (keys are option names without the leading dashes). Options on the
/// command line take precedence over the file.
#[derive(Debug, Parser)]
#[command(name = "heatsample", version, args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file with default option values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or load a graph; write its edge list and a summary.
    Graph(GraphCmd),
    /// Coherence table over bandwidths and horizons, plus a per-step profile.
    Coherence(CoherenceCmd),
    /// Draw a sampling plan.
    Sample(SampleCmd),
    /// Sample one signal and recover it.
    Recover(RecoverCmd),
    /// Success-rate grid over sparsity and budget.
    Phase(PhaseCmd),
    /// Error statistics under bounded uniform noise.
    Noisy(NoisyCmd),
    /// Per-step sample-count bounds.
    Bounds(BoundsCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphSource {
    /// Cycle graph on N nodes.
    #[arg(long, value_name = "N")]
    pub cycle: Option<usize>,

    /// Community graph with these block sizes, e.g. `40,160`.
    #[arg(long, value_name = "SIZES", value_delimiter = ',')]
    pub community: Option<Vec<usize>>,

    /// Edge probability inside a community.
    #[arg(long, default_value_t = 0.8)]
    pub pin: f64,

    /// Edge probability between communities.
    #[arg(long, default_value_t = 0.02)]
    pub pout: f64,

    /// Seed of the community generator (defaults to --seed).
    #[arg(long)]
    pub graph_seed: Option<u64>,

    /// Edge-list file (1-based `i j [w]` lines).
    #[arg(long, value_name = "PATH")]
    pub load: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Master seed for all randomness.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Output directory.
    #[arg(long, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,

    /// Format of tabular results.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Heat time step: the signal evolves under exp(-dt L).
    #[arg(long, default_value_t = FAST_HEAT_DT)]
    pub dt: f64,

    /// Bandwidth (number of leading eigenvectors).
    #[arg(long, default_value_t = 64)]
    pub k: usize,

    /// Number of regularly spaced observation times.
    #[arg(long, default_value_t = 8)]
    pub steps: usize,

    /// Irregular observation times (first must be 0); overrides --steps.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,

    /// Time unit for --times; the filter is raised to the power t / unit.
    #[arg(long, default_value_t = 1.0)]
    pub time_unit: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphCmd {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoherenceCmd {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub common: Common,

    /// Heat time step.
    #[arg(long, default_value_t = FAST_HEAT_DT)]
    pub dt: f64,

    /// Bandwidths to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    pub k_values: Vec<usize>,

    /// Horizons to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub t_values: Vec<usize>,

    /// Restrict to one distribution (both by default).
    #[arg(long)]
    pub distribution: Option<DistributionChoice>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BudgetArgs {
    /// Sampling distribution.
    #[arg(long, default_value_t = DistributionChoice::Optimal)]
    pub distribution: DistributionChoice,

    /// Total budget, split across steps in proportion to coherence.
    #[arg(long)]
    pub budget: Option<usize>,

    /// Explicit per-step budgets; overrides --budget.
    #[arg(long, value_delimiter = ',')]
    pub budgets: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleCmd {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RecoverCmd {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,

    /// Sparsity passed to the solver (and of the synthesized signal).
    #[arg(long, default_value_t = 2)]
    pub sparsity: usize,

    /// Initial signal file, one value per line; synthesized when absent.
    #[arg(long, value_name = "PATH")]
    pub signal: Option<PathBuf>,

    /// Half-width of uniform noise added to every space-time value.
    #[arg(long)]
    pub noise: Option<f64>,

    /// Iteration cap of the solver.
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Heat time step.
    #[arg(long, default_value_t = FAST_HEAT_DT)]
    pub dt: f64,

    #[arg(long, default_value_t = 64)]
    pub k: usize,

    #[arg(long, default_value_t = 8)]
    pub steps: usize,

    /// Sparsities (ascending).
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
    pub s_values: Vec<usize>,

    /// Total budgets (ascending).
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256,512")]
    pub m_values: Vec<usize>,

    #[arg(long, default_value_t = 100)]
    pub trials: usize,

    #[arg(long, default_value_t = DistributionChoice::Optimal)]
    pub distribution: DistributionChoice,

    /// Relative error at or below which a trial counts as a success.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhaseCmd {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NoisyCmd {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,

    /// Noise half-width.
    #[arg(long, default_value_t = 1e-3)]
    pub sigma: f64,

    /// Central fraction of trials kept by the trimmed means.
    #[arg(long, default_value_t = 0.9)]
    pub keep: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsCmd {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, default_value_t = DistributionChoice::Optimal)]
    pub distribution: DistributionChoice,

    #[arg(long, default_value_t = 4)]
    pub sparsity: usize,

    /// Target restricted isometry constant.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,

    /// Absolute constant of the main bound.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,

    /// Failure probability of the tail bound.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,

    /// Expectation bound target.
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,

    /// Tail bound deviation.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
}
