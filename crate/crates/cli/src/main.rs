use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Quantum version-space perceptron experiments on an exact statevector simulator.
#[derive(Parser, Debug)]
#[command(author, version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a perceptron by searching sampled hyperplanes
    Train(TrainArgs),
    /// Check SimAnd correctness and the oracle constructions
    Verify(VerifyArgs),
    /// Measure query counts over a grid of table sizes (CSV)
    Sweep(SweepArgs),
    /// Evaluate two-level AND-OR trees directly and by search
    Andor(AndOrArgs),
    /// Write a planted separable dataset
    GenDataset(GenDatasetArgs),
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Number of training points
    #[arg(short, long, required_unless_present = "dataset")]
    pub n: Option<usize>,

    /// Feature dimension
    #[arg(short, long, required_unless_present = "dataset")]
    pub m: Option<usize>,

    /// Margin of the planted dataset
    #[arg(short, long, required_unless_present = "dataset")]
    pub gamma: Option<f64>,

    /// Train on this dataset file instead of generating one per trial
    #[arg(long, conflicts_with_all = ["n", "m", "gamma"])]
    pub dataset: Option<PathBuf>,

    /// Target failure probability of the sampled candidate set
    #[arg(short, long, default_value_t = 0.1)]
    pub epsilon: f64,

    /// Constant in the candidate count `⌈c·ln(1/ε)/γ⌉`
    #[arg(short, long, default_value_t = qvs::perceptron::DEFAULT_SAMPLE_CONSTANT)]
    pub c: f64,

    #[arg(short, long, default_value_t = 1)]
    pub trials: usize,

    /// Base seed; trial `i` uses `seed + i`
    #[arg(short, long)]
    pub seed: u64,

    /// Kickback votes per candidate check (odd)
    #[arg(long, default_value_t = qvs::search::DEFAULT_VERIFY_REPEATS)]
    pub verify_repeats: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Largest data-register width of the random tables
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,

    /// Largest hyperplane-register width of the random tables
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,

    /// Number of random tables
    #[arg(long, default_value_t = 60)]
    pub tables: usize,

    #[arg(short, long, default_value_t = 0)]
    pub seed: u64,

    /// Use ⌈n/2⌉ phase bits instead of ⌈n/2⌉ + 3
    #[arg(long)]
    pub fault: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Row counts N
    #[arg(long, value_delimiter = ',', required = true)]
    pub rows: Vec<usize>,

    /// Column counts K
    #[arg(long, value_delimiter = ',', required = true)]
    pub cols: Vec<usize>,

    /// Planted tables per cell
    #[arg(long, default_value_t = 5)]
    pub instances: usize,

    /// Search runs per table
    #[arg(long, default_value_t = 20)]
    pub runs: usize,

    #[arg(short, long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = qvs::search::DEFAULT_VERIFY_REPEATS)]
    pub verify_repeats: usize,

    /// Write the CSV here instead of stdout
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AndOrArgs {
    /// Instance file: `N K` on one line, the N·K input bits on the next
    #[arg(short, long, required_unless_present = "random")]
    pub file: Option<PathBuf>,

    /// Evaluate this many random instances instead of a file
    #[arg(long, conflicts_with = "file")]
    pub random: Option<usize>,

    /// Largest fan-in of random instances
    #[arg(long, default_value_t = 8)]
    pub max_fan_in: usize,

    /// Search runs per instance
    #[arg(short, long, default_value_t = 1)]
    pub runs: usize,

    #[arg(short, long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = qvs::search::DEFAULT_VERIFY_REPEATS)]
    pub verify_repeats: usize,
}

#[derive(Args, Debug)]
pub struct GenDatasetArgs {
    #[arg(short, long)]
    pub n: usize,

    #[arg(short, long)]
    pub m: usize,

    #[arg(short, long)]
    pub gamma: f64,

    #[arg(short, long)]
    pub seed: u64,

    /// Write the dataset here instead of stdout
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Andor(a) => commands::andor(&a),
        Command::GenDataset(a) => commands::gen_dataset(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
