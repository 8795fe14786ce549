//! Command-line surface: training and every inference mode on saved
//! models, with reproducible outputs (model documents, CSV codes, PGM
//! renderings and a manifest per run).

mod commands;
mod manifest;

pub use commands::{
    cmd_classify, cmd_complete, cmd_correct, cmd_encode, cmd_generate, cmd_prototypes, cmd_train,
    CLASSES_FILE, CODES_FILE, MODEL_FILE, REPORT_FILE, SUMMARY_FILE,
};
pub use manifest::{RunManifest, MANIFEST_FILE};

use crate::error::{DicaError, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Exit codes: 0 success, 2 usage, 3 format, 4 contradictory evidence,
/// 5 capacity, 1 everything else. Clap's own usage failures also exit 2.
pub fn exit_code(error: &DicaError) -> i32 {
    match error {
        DicaError::Invalid(_) | DicaError::Dimension(_) | DicaError::MissingLabelBlock => 2,
        DicaError::Format(_) => 3,
        DicaError::ContradictoryEvidence(_) => 4,
        DicaError::Capacity(_) => 5,
        DicaError::Io(_) => 1,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dica",
    version,
    about = "Discrete independent-source factor-graph engine"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

impl Cli {
    pub fn run(&self) -> Result<()> {
        match &self.command {
            Command::Train(args) => cmd_train(args),
            Command::Generate(args) => cmd_generate(args),
            Command::Encode(args) => cmd_encode(args),
            Command::Complete(args) => cmd_complete(args),
            Command::Correct(args) => cmd_correct(args),
            Command::Classify(args) => cmd_classify(args),
            Command::Prototypes(args) => cmd_prototypes(args),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model on an IDX image file (optionally supervised).
    Train(TrainArgs),
    /// Render generated images for source configurations.
    Generate(GenerateArgs),
    /// Encode images into soft source codes.
    Encode(EncodeArgs),
    /// Fill in erased pixels.
    Complete(CompleteArgs),
    /// Clean up corrupted images (forwards only, no posterior product).
    Correct(EncodeArgs),
    /// Classify images with a supervised model.
    Classify(ClassifyArgs),
    /// Render the per-class prototypes of a supervised model.
    Prototypes(PrototypesArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// IDX3 image file.
    #[arg(long)]
    pub images: PathBuf,
    /// IDX1 label file (required with --supervised).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Seeded subset size; omit to train on every image.
    #[arg(long)]
    pub count: Option<usize>,
    /// Number of hidden sources.
    #[arg(long)]
    pub num_sources: usize,
    /// Alphabet size of every source.
    #[arg(long, default_value_t = 2)]
    pub source_arity: usize,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub inner_cycles: usize,
    /// Binarization threshold (pixel >= threshold becomes symbol 1).
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Train the label block from the label file.
    #[arg(long, requires = "labels")]
    pub supervised: bool,
    /// Magnitude of the seeded perturbation on the initial priors.
    #[arg(long, default_value_t = 0.01)]
    pub init_perturbation: f64,
    /// Output directory (model.json, report.csv, manifest.json).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Emit one image per product-space configuration.
    #[arg(long, group = "source_values")]
    pub all_configs: bool,
    /// One source configuration, comma-separated symbol indices.
    #[arg(long, group = "source_values")]
    pub config: Option<String>,
    /// Soft source forwards: comma-separated probabilities of symbol 1
    /// (binary sources only).
    #[arg(long, group = "source_values")]
    pub soft: Option<String>,
    #[arg(long, default_value_t = 28)]
    pub width: usize,
    #[arg(long, default_value_t = 28)]
    pub height: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub images: PathBuf,
    /// Seeded subset size; omit to use every image.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    /// Fraction of pixels to erase per image (seeded).
    #[arg(long, default_value_t = 0.5)]
    pub erasure: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub images: PathBuf,
    /// Label file; enables the accuracy summary.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PrototypesArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 28)]
    pub width: usize,
    #[arg(long, default_value_t = 28)]
    pub height: usize,
    #[arg(long)]
    pub out: PathBuf,
}
