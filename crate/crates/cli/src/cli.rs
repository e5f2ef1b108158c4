use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sdib::{AmiNormalizer, Balance, Shape, SparseDibConfig, WeightInit};

#[derive(Debug, Parser)]
#[command(
    name = "sdib",
    version,
    about = "Sparse deterministic information bottleneck clustering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a numeric CSV and learn feature weights.
    Cluster(ClusterArgs),
    /// Sweep the L1 budget and report the entropy trajectory and plateau.
    Tune(TuneArgs),
    /// Run the synthetic benchmark over a grid of mixture settings.
    Simulate(SimulateArgs),
    /// Compare two label files with ARI and AMI.
    Eval(EvalArgs),
    /// Write one synthetic dataset with its ground truth.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

impl OnOff {
    pub fn is_on(self) -> bool {
        matches!(self, OnOff::On)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Uniform,
    #[value(alias = "warm-start", alias = "warm_start")]
    Warm,
}

impl From<InitArg> for WeightInit {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Uniform => WeightInit::Uniform,
            InitArg::Warm => WeightInit::WarmStart,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizerArg {
    Min,
    Geometric,
    Arithmetic,
    Max,
}

impl From<NormalizerArg> for AmiNormalizer {
    fn from(a: NormalizerArg) -> Self {
        match a {
            NormalizerArg::Min => AmiNormalizer::Min,
            NormalizerArg::Geometric => AmiNormalizer::Geometric,
            NormalizerArg::Arithmetic => AmiNormalizer::Arithmetic,
            NormalizerArg::Max => AmiNormalizer::Max,
        }
    }
}

/// Where output files go and whether to reuse an echoed configuration.
#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// JSON config, or a summary.json whose "config" echo is reused. Flags given
    /// on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit with status 3 when any solver stage fails to converge.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// The first CSV row holds feature names.
    #[arg(long)]
    pub header: bool,
    #[arg(long, value_enum)]
    pub standardize: Option<OnOff>,
    /// `auto` for the normal-reference rule, or a CSV with one bandwidth per feature.
    #[arg(long)]
    pub bandwidths: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long, value_enum)]
    pub weights_init: Option<InitArg>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub beta_growth: Option<f64>,
    #[arg(long)]
    pub max_beta_retries: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub kmeans_restarts: Option<usize>,
    #[arg(long)]
    pub floor: Option<f64>,
}

impl SolverArgs {
    pub fn apply(&self, cfg: &mut SparseDibConfig) {
        macro_rules! set {
            ($field:ident => $($target:tt)+) => {
                if let Some(v) = self.$field {
                    cfg.$($target)+ = v.into();
                }
            };
        }
        set!(seed => dib.seed);
        set!(k => dib.k);
        set!(u => u);
        set!(weights_init => init);
        set!(restarts => dib.restarts);
        set!(eps => eps);
        set!(max_outer => max_outer);
        set!(beta0 => dib.beta0);
        set!(beta_growth => dib.beta_growth);
        set!(max_beta_retries => dib.max_beta_retries);
        set!(max_iters => dib.max_iters);
        set!(kmeans_restarts => kmeans_restarts);
        set!(floor => floor);
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// `min:max:step` or a comma-separated ascending list.
    #[arg(long)]
    pub u_grid: Option<String>,
    /// Start every grid point from the configured init instead of the previous solution.
    #[arg(long)]
    pub independent: bool,
    /// Also write an SVG line plot of the trajectory.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated feature counts.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<usize>>,
    /// Comma-separated informative fractions.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Comma-separated true cluster counts; also the K given to the solver.
    #[arg(long = "clusters", value_delimiter = ',')]
    pub clusters: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub balance: Option<Vec<BalanceArg>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub shape: Option<Vec<ShapeArg>>,
    #[arg(long, value_delimiter = ',')]
    pub separation: Option<Vec<f64>>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long, value_enum)]
    pub standardize: Option<OnOff>,
    /// Also write every generated dataset with its metadata.
    #[arg(long)]
    pub emit_datasets: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BalanceArg {
    Balanced,
    Unbalanced,
}

impl From<BalanceArg> for Balance {
    fn from(a: BalanceArg) -> Self {
        match a {
            BalanceArg::Balanced => Balance::Balanced,
            BalanceArg::Unbalanced => Balance::Unbalanced,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShapeArg {
    Spherical,
    Elliptical,
}

impl From<ShapeArg> for Shape {
    fn from(a: ShapeArg) -> Self {
        match a {
            ShapeArg::Spherical => Shape::Spherical,
            ShapeArg::Elliptical => Shape::Elliptical,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// First label CSV; labels are read from the last column.
    pub a: PathBuf,
    /// Second label CSV.
    pub b: PathBuf,
    /// Both files start with a header row.
    #[arg(long)]
    pub header: bool,
    #[arg(long, value_enum, default_value = "arithmetic")]
    pub normalizer: NormalizerArg,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// A data.json sidecar or bare generator config to reuse; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long = "clusters")]
    pub clusters: Option<usize>,
    #[arg(long, value_enum)]
    pub balance: Option<BalanceArg>,
    #[arg(long, value_enum)]
    pub shape: Option<ShapeArg>,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Randomly permute columns so informative features are not first.
    #[arg(long)]
    pub shuffle: bool,
    /// Write a header row of feature names.
    #[arg(long)]
    pub header: bool,
}
