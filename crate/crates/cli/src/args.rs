//! Flag grammar. Every args struct serializes into the run provenance, so
//! re-running an embedded config reproduces its artifact byte-for-byte.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "npproc",
    version,
    about = "Nonparametric process toolkit: CRP/IBP samplers, GP conditioning, topic models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Draw from the stochastic processes
    Sample {
        #[command(subcommand)]
        kind: SampleKind,
    },
    /// Fit a model and write it to disk
    Fit {
        #[command(subcommand)]
        kind: FitKind,
    },
    /// Score artifacts under their closed-form densities
    Score {
        #[command(subcommand)]
        kind: ScoreKind,
    },
    /// Evaluate a fitted model on held-out data
    Eval {
        #[command(subcommand)]
        kind: EvalKind,
    },
    /// Compare model files on one held-out set
    Compare(CompareArgs),
}

#[derive(Subcommand)]
pub enum SampleKind {
    /// Chinese restaurant partitions; one line of cluster sizes per draw
    Crp(CrpArgs),
    /// Indian buffet feature matrices in the block text format
    Ibp(IbpArgs),
    /// Joint Gaussian draws from a GP prior over given points
    GpPrior(GpPriorArgs),
}

#[derive(Subcommand)]
pub enum FitKind {
    /// Collapsed Gibbs LDA
    Lda(LdaFitArgs),
    /// Truncated Gibbs focused topic model
    Ftm(FtmFitArgs),
    /// GP regression: posterior mean/variance at test points
    Gp(GpFitArgs),
}

#[derive(Subcommand)]
pub enum ScoreKind {
    /// Log-probability of feature matrices under the buffet class density
    Ibp(ScoreIbpArgs),
}

#[derive(Subcommand)]
pub enum EvalKind {
    /// Document-completion perplexity
    Perplexity(EvalArgs),
}

#[derive(Args, Serialize)]
pub struct CrpArgs {
    /// Items per partition
    #[arg(long)]
    pub n: usize,
    /// DP concentration
    #[arg(long)]
    pub alpha: f64,
    /// Independent draws to emit
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    #[arg(long, env = "NPPROC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct IbpArgs {
    /// Customers (datapoints)
    #[arg(long)]
    pub n: usize,
    /// Mass parameter
    #[arg(long)]
    pub alpha: f64,
    /// Concentration parameter; 1 recovers the one-parameter buffet
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    #[arg(long, env = "NPPROC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Draw from the finite Beta-Bernoulli model with this many columns
    /// instead of the buffet predictive
    #[arg(long)]
    pub finite_k: Option<usize>,
    /// Emit a JSON summary (mean K+ and its standard error) instead of
    /// the matrices themselves
    #[arg(long)]
    pub summary: bool,
    /// Independent seeded chains for the summary
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct GpPriorArgs {
    /// Comma-separated input points, e.g. "0,0.5,2"
    #[arg(long, conflicts_with = "points_file")]
    pub points: Option<String>,
    /// CSV file of input points (first column)
    #[arg(long)]
    pub points_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub lengthscale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub signal_variance: f64,
    /// Constant prior mean; omitted means zero
    #[arg(long)]
    pub mean_constant: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    #[arg(long, env = "NPPROC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct LdaFitArgs {
    /// UCI bag-of-words docword file
    #[arg(long)]
    pub docword: PathBuf,
    /// Vocabulary file, one token per line
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub topics: usize,
    /// Document-topic concentration
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Topic-word concentration
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    /// Mean document length (generation-side parameter, carried for
    /// completeness)
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 100)]
    pub burn_in: usize,
    #[arg(long, env = "NPPROC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Model JSON output path
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of per-sweep joint log-probability per chain
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Independent seeded chains; the best final joint is kept
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
}

#[derive(Args, Serialize)]
pub struct FtmFitArgs {
    #[arg(long)]
    pub docword: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Truncation level of the gate matrix
    #[arg(long)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1.0)]
    pub ibp_alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ibp_beta: f64,
    /// Concentration on active topics
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 100)]
    pub burn_in: usize,
    #[arg(long, env = "NPPROC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
}

#[derive(Args, Serialize)]
pub struct GpFitArgs {
    /// Training CSV with columns x,y (header optional)
    #[arg(long)]
    pub train: PathBuf,
    /// Comma-separated test points
    #[arg(long, conflicts_with = "test_file")]
    pub test_points: Option<String>,
    /// CSV file of test points (first column)
    #[arg(long)]
    pub test_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub lengthscale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub signal_variance: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_variance: f64,
    #[arg(long)]
    pub mean_constant: Option<f64>,
    /// Posterior CSV (x,mean,variance); stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct ScoreIbpArgs {
    /// File of matrices in the block format emitted by `sample ibp`
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct EvalArgs {
    /// Model JSON written by `fit`
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub heldout_docword: PathBuf,
    #[arg(long)]
    pub heldout_vocab: PathBuf,
    /// Fraction of each held-out document used to estimate its weights
    #[arg(long, default_value_t = 0.5)]
    pub fold_in: f64,
    #[arg(long, env = "NPPROC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct CompareArgs {
    /// Model JSON files, compared in the order given
    #[arg(long, num_args = 1.., required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub heldout_docword: PathBuf,
    #[arg(long)]
    pub heldout_vocab: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub fold_in: f64,
    #[arg(long, env = "NPPROC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Append a uniform-model row as a calibration anchor
    #[arg(long)]
    pub uniform_baseline: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}
