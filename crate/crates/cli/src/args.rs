//! Command-line flags. Each subcommand serializes the flags it was given
//! into a partial configuration that overrides the config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::config::{read_config_file, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sac", version, about = "Shape-based analog computing simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Proto-shape sweep across families and temperatures.
    Shape(ShapeArgs),
    /// Sweep of one synthesized block.
    Block(BlockArgs),
    /// Winner-take-all outputs as the budget varies.
    Wta(WtaArgs),
    /// Multiplier error statistics per spline count.
    MulError(MulErrorArgs),
    /// Monte Carlo SNR of one block against two in parallel.
    Snr(SnrArgs),
    /// Block deviation under sampled branch mismatch.
    Mismatch(MismatchArgs),
    /// Trains a network and writes its JSON document.
    Train(TrainArgs),
    /// Evaluates a saved network under several families.
    Eval(EvalArgs),
}

fn skip_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Common {
    /// JSON file of configuration values; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct UnitArgs {
    /// Spline count(s), comma separated.
    #[arg(long = "S", value_delimiter = ',')]
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    pub spline_counts: Option<Vec<usize>>,
    #[arg(long = "C")]
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long = "K")]
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Families: rectifier, wi, si, ekv.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<String>>,
    /// Temperatures in Celsius.
    #[arg(long = "temps", value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(rename = "temperatures", skip_serializing_if = "Option::is_none")]
    pub temperatures: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GridArgs {
    /// Sweep grid `lo:hi:count`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ShapeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub unit: UnitArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BlockArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub unit: UnitArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// proto, cosh, sinh, relu, phi1, phi2, softplus or mul.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
    /// Second multiplier operand.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    /// ReLU threshold; 0 selects max(0, x).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct WtaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub unit: UnitArgs,
    /// Competing inputs, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<f64>>,
    /// Budget grid `lo:hi:count`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budgets: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MulErrorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub unit: UnitArgs,
    /// Odd grid side over [-C, C].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SnrArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    /// Input noise sigma, shared by parallel blocks.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_in: Option<f64>,
    /// Circuit noise sigma, independent per block.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_ckt: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MismatchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub unit: UnitArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
    /// Relative branch gain sigmas, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_sigmas: Option<Vec<f64>>,
    /// Branch offset sigma in input units.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_sigma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DataArgs {
    /// `xor`, `mnist` or a CSV path (last column is the label).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    /// MNIST directory holding the four IDX files.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_dir: Option<String>,
    /// MNIST split: train or test.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    /// Seeded uniform subset size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<usize>,
    /// Gaussian jitter sigma for augmented copies.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter: Option<f64>,
    /// Augmented copies per base point.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_point: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub unit: UnitArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Layer sizes such as 2-4-1.
    #[arg(long = "net")]
    #[serde(rename = "topology", skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    /// Hidden activation: phi1, phi2, relu, softplus, identity.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[arg(long = "lr")]
    #[serde(rename = "learning-rate", skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[arg(long = "batch")]
    #[serde(rename = "batch-size", skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub momentum: Option<f64>,
    /// Weight bound as a fraction of C.
    #[arg(long = "clip")]
    #[serde(rename = "weight-clip", skip_serializing_if = "Option::is_none")]
    pub weight_clip: Option<f64>,
    /// Branch gain sigma resampled every mini-batch.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatch_sigma: Option<f64>,
    /// Per-epoch loss CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub unit: UnitArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Network document to evaluate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net: Option<String>,
    /// Adds an exact-arithmetic row.
    #[arg(long)]
    #[serde(skip_serializing_if = "skip_false")]
    pub oracle: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Shape(_) => "shape",
            Command::Block(_) => "block",
            Command::Wta(_) => "wta",
            Command::MulError(_) => "mul-error",
            Command::Snr(_) => "snr",
            Command::Mismatch(_) => "mismatch",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Shape(a) => &a.common,
            Command::Block(a) => &a.common,
            Command::Wta(a) => &a.common,
            Command::MulError(a) => &a.common,
            Command::Snr(a) => &a.common,
            Command::Mismatch(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::Eval(a) => &a.common,
        }
    }

    fn flags(&self) -> Value {
        let v = match self {
            Command::Shape(a) => serde_json::to_value(a),
            Command::Block(a) => serde_json::to_value(a),
            Command::Wta(a) => serde_json::to_value(a),
            Command::MulError(a) => serde_json::to_value(a),
            Command::Snr(a) => serde_json::to_value(a),
            Command::Mismatch(a) => serde_json::to_value(a),
            Command::Train(a) => serde_json::to_value(a),
            Command::Eval(a) => serde_json::to_value(a),
        };
        v.expect("flags serialize")
    }

    /// Defaults, then `--config`, then the flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = self.common().config.as_deref().map(read_config_file).transpose()?;
        let Value::Object(flags) = self.flags() else {
            unreachable!("flag structs serialize to objects");
        };
        RunConfig::resolve(self.name(), file, flags)
    }
}

/// Parses `argv` into a resolved configuration.
pub fn parse<I, T>(argv: I) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseOutcome::Clap)?;
    cli.command.resolve().map_err(ParseOutcome::Cli)
}

#[derive(Debug)]
pub enum ParseOutcome {
    /// Help, version or an argument error, rendered by clap.
    Clap(clap::Error),
    Cli(CliError),
}
