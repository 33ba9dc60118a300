use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use repar_core::harness::NeighborMode;
use repar_core::Seed;

#[derive(Parser, Debug)]
#[command(name = "repar", version, about = "Replicable learning of parities over GF(2)")]
pub struct Cli {
    /// Master seed: a decimal u64 or 64 hex digits.
    #[arg(long, global = true, env = "REPAR_SEED")]
    pub seed: Option<Seed>,

    /// TOML experiment config for the bench commands.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Learn a parity from a labeled dataset file.
    Learn(LearnArgs),
    /// Recover a replicable subspace from a dataset file.
    Span(SpanArgs),
    /// Print the greedy independent-set partition of a dataset file.
    Partition(InputArgs),
    /// Paired-run agreement of an algorithm on a synthetic distribution.
    BenchReplicability(ReplicabilityArgs),
    /// Uncovered fraction against the deterministic bound.
    BenchCoverage(CoverageArgs),
    /// Empirical sensitivity of the partition histogram.
    BenchSensitivity(SensitivityArgs),
    /// Heavy-hitter agreement on planted frequencies.
    BenchHh(HeavyHitterArgs),
    /// Print default thresholds and the advisory sample size.
    CalcParams(CalcArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Dataset file (`#d=<d>` header, one bit string per line).
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Override T_min; requires --t-max.
    #[arg(long, requires = "t_max")]
    pub t_min: Option<f64>,
    /// Override T_max; requires --t-min.
    #[arg(long, requires = "t_min")]
    pub t_max: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SpanArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Args, Debug)]
pub struct LearnArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Run the learner inside the replicability wrapper.
    #[arg(long)]
    pub wrap: bool,
    /// Base learner batch size under --wrap.
    #[arg(long, requires = "wrap")]
    pub batch: Option<usize>,
    #[arg(long, default_value_t = 0.1, requires = "wrap")]
    pub wrapper_rho: f64,
    #[arg(long, default_value_t = 0.1, requires = "wrap")]
    pub wrapper_delta: f64,
    #[arg(long, default_value_t = 4.0, requires = "wrap")]
    pub c_t: f64,
    #[arg(long, default_value_t = 1.0, requires = "wrap")]
    pub c_k: f64,
    #[arg(long, default_value_t = 1.0, requires = "wrap")]
    pub c_delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmKind {
    Span,
    Parity,
    WrappedParity,
}

/// Synthetic distribution flags; ignored when --config is given.
#[derive(Args, Debug)]
pub struct DistributionArgs {
    #[arg(short = 'd', long = "dim", default_value_t = 5)]
    pub d: usize,
    /// Planted subspace dimension; uniform over GF(2)^d when absent.
    #[arg(long)]
    pub planted: Option<usize>,
    /// Probability of an off-subspace sample.
    #[arg(long, default_value_t = 0.0)]
    pub leak: f64,
    /// Label samples with a random hidden parity.
    #[arg(long)]
    pub labels: bool,
    #[arg(long)]
    pub label_noise: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ReplicabilityArgs {
    #[command(flatten)]
    pub dist: DistributionArgs,
    #[arg(long, value_enum, default_value_t = AlgorithmKind::Span)]
    pub algorithm: AlgorithmKind,
    #[arg(short = 'm', long, default_value_t = 2000)]
    pub m: usize,
    #[arg(long, default_value_t = 400)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Thresholds as multiples of m/d^2, e.g. `0.25,0.5`; defaults when absent.
    #[arg(long, value_delimiter = ',')]
    pub scaled_thresholds: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub dist: DistributionArgs,
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
    pub ms: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, value_delimiter = ',')]
    pub scaled_thresholds: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exhaustive,
    AllNeighbors,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Neighbors {
    Replace,
    InsertDelete,
}

impl From<Neighbors> for NeighborMode {
    fn from(n: Neighbors) -> Self {
        match n {
            Neighbors::Replace => NeighborMode::Replace,
            Neighbors::InsertDelete => NeighborMode::InsertDelete,
        }
    }
}

#[derive(Args, Debug)]
pub struct SensitivityArgs {
    #[arg(short = 'd', long = "dim", default_value_t = 2)]
    pub d: usize,
    #[arg(short = 'm', long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Neighbors::Replace)]
    pub mode: Neighbors,
    /// Largest deviation the bench accepts.
    #[arg(long, default_value_t = 1)]
    pub claimed_bound: usize,
}

#[derive(Args, Debug)]
pub struct HeavyHitterArgs {
    /// Planted item frequencies; all other items are unique.
    #[arg(long, value_delimiter = ',', default_value = "0.9")]
    pub frequencies: Vec<f64>,
    /// Items per run; the advisory size when absent.
    #[arg(short = 'k', long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
}

#[derive(Args, Debug)]
pub struct CalcArgs {
    #[arg(short = 'd', long = "dim")]
    pub d: usize,
    #[arg(short = 'm', long)]
    pub m: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
}
