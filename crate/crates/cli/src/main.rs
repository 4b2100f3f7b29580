//! `sunshade` command-line tool: simulate scenes, turn NMEA and UV logs into
//! feature tables, and train and evaluate sun/shade classifiers.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Clone, Parser)]
#[command(name = "sunshade", version, about = "Sun/shade classification from GNSS signal strength")]
pub struct Cli {
    /// Output directory for every file a command writes.
    #[arg(long, global = true, env = "SUNSHADE_OUT", default_value = "sunshade-out")]
    pub out: PathBuf,

    /// Upper bound on worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate NMEA logs, UV logs and ground truth for a synthetic scene.
    Simulate(SimulateArgs),
    /// Decode NMEA logs into a per-satellite observation CSV.
    Parse(ParseArgs),
    /// Build the labelled feature table from NMEA and UV logs.
    Featurize(FeaturizeArgs),
    /// Train one classifier on a feature table and save it as JSON.
    Train(TrainArgs),
    /// Apply a saved model to a feature table.
    Predict(PredictArgs),
    /// Leave-one-day-out cross-validation over one or more methods.
    Evaluate(EvaluateArgs),
    /// Cross-validate one method over all 14 feature-set masks.
    Ablate(AblateArgs),
    /// Permutation feature importance on a held-out day.
    Importance(ImportanceArgs),
    /// Train on one feature table and test on another.
    CrossScene(CrossSceneArgs),
    /// Run a recorded command again and compare its outputs byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Built-in scene (default-a, default-b) or a JSON config file.
    #[arg(long, default_value = "default-a")]
    pub scene: String,
    /// Overrides the scene's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the scene's UV index shade threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ParseArgs {
    #[arg(required = true)]
    pub nmea: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FeaturizeArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub nmea: Vec<PathBuf>,
    #[arg(long, num_args = 1..)]
    pub uv: Vec<PathBuf>,
    /// Minute-mean UV index below this is labelled shade.
    #[arg(long, default_value_t = sunshade::groundtruth::DEFAULT_SHADE_THRESHOLD)]
    pub threshold: f64,
    /// Seconds added to UV timestamps before aligning them with GNSS time.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub clock_offset: i64,
    #[arg(long, default_value = "features.csv")]
    pub file_name: String,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, alias = "methods", default_value = "svm-rbf")]
    pub method: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Train on unscaled features instead of z-scores.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "ABCD", allow_hyphen_values = true)]
    pub mask: String,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// `all` or a comma-separated list such as `svm-rbf,knn`.
    #[arg(long, default_value = "all")]
    pub methods: String,
    #[arg(long, default_value = "ABCD", allow_hyphen_values = true)]
    pub mask: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub raw: bool,
    /// Also report a per-minute majority vote over satellites.
    #[arg(long)]
    pub minute_vote: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Held-out day (YYYY-MM-DD); defaults to the last day in the table.
    #[arg(long)]
    pub test_day: Option<chrono::NaiveDate>,
}

#[derive(Debug, Clone, Args)]
pub struct CrossSceneArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "ABCD", allow_hyphen_values = true)]
    pub mask: String,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match commands::run(cli, argv[1..].to_vec()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
