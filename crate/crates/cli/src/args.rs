use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config_file::OutputFormat;

#[derive(Debug, Parser)]
#[command(name = "scorelab", version, about = "Scoring rules corrected for observation error")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one score and print it as a single JSON line.
    Score(ScoreArgs),
    /// Run a Monte Carlo experiment described by a JSON config.
    Experiment(ExperimentArgs),
    /// Export density curves of the score streams as long-format CSV.
    Density(DensityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreArg {
    Log,
    Crps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrectionArg {
    None,
    Wedge,
    Vee,
    VeeJoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    None,
    AdditiveGaussian,
    MultiplicativeGamma,
    Eiv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

/// Vector-valued flags take comma-separated numbers; matrices are row-major.
#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ScoreArgs {
    #[arg(long, value_enum)]
    pub score: ScoreArg,
    #[arg(long, value_enum, default_value = "none")]
    pub correction: CorrectionArg,
    #[arg(long, value_enum, default_value = "none")]
    pub model: ModelArg,

    /// Forecast mean (comma-separated vector for the EIV model).
    #[arg(long, value_delimiter = ',')]
    pub fc_mean: Vec<f64>,
    #[arg(long)]
    pub fc_sd: Option<f64>,
    #[arg(long)]
    pub fc_shape: Option<f64>,
    #[arg(long)]
    pub fc_rate: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub fc_cov: Vec<f64>,

    #[arg(long, value_delimiter = ',')]
    pub truth_mean: Vec<f64>,
    #[arg(long)]
    pub truth_var: Option<f64>,
    #[arg(long)]
    pub truth_shape: Option<f64>,
    #[arg(long)]
    pub truth_rate: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub truth_cov: Vec<f64>,

    /// Additive noise variance ω².
    #[arg(long)]
    pub omega2: Option<f64>,
    /// Multiplicative error shape a.
    #[arg(long)]
    pub err_shape: Option<f64>,
    /// Multiplicative error scale b.
    #[arg(long)]
    pub err_scale: Option<f64>,

    #[arg(long, value_delimiter = ',')]
    pub obs_bias: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub obs_noise_cov: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub fcerr_bias: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub fcerr_cov: Vec<f64>,

    /// Verification data y.
    #[arg(long, value_delimiter = ',', required = true)]
    pub obs: Vec<f64>,
    /// Auxiliary forecast z (EIV model).
    #[arg(long, value_delimiter = ',')]
    pub fc_obs: Vec<f64>,

    /// Relative tolerance of the quadrature used by the gamma CRPS correction.
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides SCORELAB_SEED and the config's seed.
    #[arg(long, env = "SCORELAB_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub run: RunArgs,
}
