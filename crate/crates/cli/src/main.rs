mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

/// Iterative aggregation of GNSS traces, with a noise simulator and a
/// calibration harness.
#[derive(Debug, Parser)]
#[command(name = "miaa", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed. Reruns with the same seed write identical files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// JSON config file. Its schema depends on the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a ground-truth path and noisy recordings of it.
    Generate(GenerateArgs),
    /// Aggregate trajectory files into one track.
    Aggregate(AggregateArgs),
    /// Compare an aggregate with a ground-truth track.
    Evaluate(EvaluateArgs),
    /// Run the generate / aggregate / evaluate sweep and plot medians.
    Experiment(ExperimentArgs),
    /// Redraw experiment plots from a results CSV.
    Plot(PlotArgs),
    /// Reproduce the two-trajectory input that cycles instead of converging.
    Counterexample,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// STRAIGHT, MODERATE or SWITCHBACKS.
    #[arg(long)]
    pub shape: Option<String>,
    /// Path length in meters.
    #[arg(long)]
    pub length: Option<f64>,
    /// Number of noisy tracks.
    #[arg(long, short = 'n')]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// CSV or GPX files. A directory contributes its track_*.csv and *.gpx files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// MEDIAN_LENGTH, MIN_SUM_DISTANCE or RANDOM
    #[arg(long = "master")]
    pub master_mode: Option<String>,
    /// DTW_L1, DTW_L2, FRECHET or NEAREST_NEIGHBOUR
    #[arg(long = "match")]
    pub match_mode: Option<String>,
    /// BARYCENTRE, MEDIAN_TIME or FURTHEST
    #[arg(long = "represent")]
    pub represent_mode: Option<String>,
    /// MARGINAL_MEDIAN, GEOMETRIC_MEDIAN, MEAN_L2 or MIN_COVERING_CIRCLE
    #[arg(long = "agg")]
    pub agg_mode: Option<String>,
    /// Snap every aggregated point to the nearest input point.
    #[arg(long)]
    pub anchor: bool,
    /// Stop once the RMS shift between successive masters drops below this (m)
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub iter_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Aggregated track (CSV or single-segment GPX).
    #[arg(long)]
    pub agg: PathBuf,
    /// Ground-truth track.
    #[arg(long)]
    pub truth: PathBuf,
    /// Resampling resolution.
    #[arg(long, default_value_t = miaa::eval::DEFAULT_NPTS)]
    pub npts: usize,
    /// Align with a general affine map instead of a similarity.
    #[arg(long)]
    pub full_affine: bool,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Override replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Override sample sizes, e.g. 3,10,20.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Override shapes, e.g. STRAIGHT,MODERATE.
    #[arg(long, value_delimiter = ',')]
    pub shapes: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Results CSV (defaults to <out>/results.csv).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 4,
            CliError::Core(_) => 3,
        }
    }
}
