//! Command-line grammar. Every command reads datasets either from a glyph
//! text file (`--data`) or from an IDX image/label pair
//! (`--images` + `--labels`).

use clap::{Args, Parser, Subcommand, ValueEnum};
use pairnet_core::ensemble::TopologyVariant;
use pairnet_core::error::{Error, Result};
use pairnet_core::grid::Dataset;
use pairnet_core::io::{glyph_text, idx};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "pairnet",
    about = "Pairwise image recognition: metric and trained one-vs-one networks",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a nearest-neighbor metric network from labeled samples
    BuildMetric(BuildMetricArgs),
    /// Train one block per class pair and assemble the network
    Train(TrainArgs),
    /// Classify one image and print the decision
    Predict(PredictArgs),
    /// Score a model against a labeled dataset
    Eval(EvalArgs),
    /// Grow a saved model by one unit without touching old blocks
    AddClass(AddClassArgs),
    /// Generate a noisy letter-glyph dataset
    GenGlyphs(GenGlyphsArgs),
    /// Print the structure of a saved model
    Inspect(InspectArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    /// One block per unordered pair; the losing side reuses the inverted bit
    Compressed,
    /// One block per ordered pair
    Full,
}

impl TopologyArg {
    pub fn variant(self) -> TopologyVariant {
        match self {
            TopologyArg::Compressed => TopologyVariant::Compressed,
            TopologyArg::Full => TopologyVariant::Full,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// Single linear threshold unit per block
    Perceptron,
    /// One sigmoid hidden layer per block, trained by gradient descent
    Sigmoid,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Jsonl,
}

/// Dataset source flags shared by several commands.
#[derive(Args, Debug)]
pub struct DataArgs {
    /// Glyph text dataset
    #[arg(long, value_name = "FILE", conflicts_with_all = ["images", "labels"])]
    pub data: Option<PathBuf>,

    /// IDX image file (big-endian, magic 0x00000803)
    #[arg(long, value_name = "FILE", requires = "labels")]
    pub images: Option<PathBuf>,

    /// IDX label file (big-endian, magic 0x00000801)
    #[arg(long, value_name = "FILE", requires = "images")]
    pub labels: Option<PathBuf>,

    /// Gray level above which an IDX cell counts as active
    #[arg(long, value_name = "T", default_value_t = 0.5)]
    pub binarize_threshold: f64,
}

impl DataArgs {
    /// Loads the dataset, binarizing IDX input at the configured threshold.
    pub fn load(&self) -> Result<Dataset> {
        match (&self.data, &self.images, &self.labels) {
            (Some(path), None, None) => glyph_text::load_glyphs(path),
            (None, Some(images), Some(labels)) => {
                let gray = idx::load_idx(images, labels)?;
                gray.binarize(self.binarize_threshold)
            }
            _ => Err(Error::Config(
                "provide --data FILE or --images FILE --labels FILE".into(),
            )),
        }
    }
}

#[derive(Args, Debug)]
pub struct BuildMetricArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Where to write the model file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = TopologyArg::Compressed)]
    pub topology: TopologyArg,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Where to write the model file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = KindArg::Perceptron)]
    pub kind: KindArg,

    #[arg(long, value_enum, default_value_t = TopologyArg::Compressed)]
    pub topology: TopologyArg,

    /// Learning rate; defaults to 0.5 for perceptron, 0.1 for sigmoid
    #[arg(long, value_name = "RATE")]
    pub lr: Option<f64>,

    #[arg(long, value_name = "N", default_value_t = 1000)]
    pub max_epochs: usize,

    /// Hidden layer width (sigmoid kind only)
    #[arg(long, value_name = "N", default_value_t = 8)]
    pub hidden_size: usize,

    /// Half-width of the uniform parameter initialization
    #[arg(long, value_name = "S", default_value_t = 0.1)]
    pub init_scale: f64,

    /// Stop a block early once its training errors reach this count
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub target_errors: usize,

    /// Global seed; each block derives its own streams from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Saved model file
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,

    /// Glyph text file; the first record is the input (its label is ignored)
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Resolve NoDecision by vote count (lowest unit index breaks ties)
    #[arg(long)]
    pub fallback: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Saved model file
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,

    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
}

#[derive(Args, Debug)]
pub struct AddClassArgs {
    /// Saved model file to grow
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,

    #[command(flatten)]
    pub data: DataArgs,

    /// Where to write the grown model
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Learning rate for the new blocks (trained kinds)
    #[arg(long, value_name = "RATE")]
    pub lr: Option<f64>,

    #[arg(long, value_name = "N", default_value_t = 1000)]
    pub max_epochs: usize,

    #[arg(long, value_name = "S", default_value_t = 0.1)]
    pub init_scale: f64,

    #[arg(long, value_name = "N", default_value_t = 0)]
    pub target_errors: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct GenGlyphsArgs {
    /// Where to write the glyph text file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Number of letter classes, starting at A (2 to 26)
    #[arg(long, default_value_t = 3)]
    pub classes: usize,

    #[arg(long, value_name = "N", default_value_t = 1)]
    pub samples_per_class: usize,

    /// Cells to flip in each copy (0 keeps the clean letter)
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub noise: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    /// Saved model file
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
}
