use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bosonkit",
    version,
    about = "Multiphoton interference statistics with realistic photocounters"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or validate an interferometer matrix file.
    Unitary(UnitaryArgs),
    /// Output count distribution for a Fock input.
    Dist(DistArgs),
    /// Correction coefficients, optionally swept over K or the dead-time ratio.
    Correction(CorrectionArgs),
    /// Draw samples from the exact count distribution.
    Sample(SampleArgs),
    /// Conditional count probabilities P(k|m) of a detector.
    Pkm(PkmArgs),
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group = ArgGroup::new("source").required(true).args(["dft", "haar", "validate", "spec"]))]
pub struct UnitaryArgs {
    /// N-mode discrete Fourier transform.
    #[arg(long, value_name = "N")]
    pub dft: Option<usize>,
    /// N-mode Haar-random unitary.
    #[arg(long, value_name = "N")]
    pub haar: Option<usize>,
    /// Seed for --haar.
    #[arg(long, default_value_t = 0, requires = "haar")]
    pub seed: u64,
    /// Check an existing matrix file for unitarity.
    #[arg(long, value_name = "FILE")]
    pub validate: Option<PathBuf>,
    /// Any other spec accepted by --unitary elsewhere, e.g. `bs` or `identity:4`.
    #[arg(long, value_name = "SPEC")]
    pub spec: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
pub enum DetectorKind {
    #[value(name = "ideal")]
    #[serde(rename = "ideal")]
    Ideal,
    #[value(name = "lossy")]
    #[serde(rename = "lossy")]
    Lossy,
    #[value(name = "array")]
    #[serde(rename = "array")]
    Array,
    #[value(name = "deadtime-mono")]
    #[serde(rename = "deadtime-mono")]
    DeadTimeMono,
    #[value(name = "deadtime-exp")]
    #[serde(rename = "deadtime-exp")]
    DeadTimeExp,
}

#[derive(Clone, Debug, Default, Args)]
pub struct DetectorArgs {
    #[arg(long, value_enum)]
    pub detector: Option<DetectorKind>,
    /// Detection efficiency.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Number of on/off detectors in an array.
    #[arg(long = "K", value_name = "K")]
    pub k: Option<usize>,
    /// Dead time as a fraction of the measurement window.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Decay rate of the exponential mode profile.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, Default, Args)]
pub struct ExperimentArgs {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Matrix file, `dft:N`, `haar:N,SEED`, `identity:N` or `bs`.
    #[arg(long, value_name = "SPEC")]
    pub unitary: Option<String>,
    /// Photons per input mode, e.g. "1,1,0".
    #[arg(long, value_name = "PATTERN")]
    pub input: Option<String>,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Re-emit an existing distribution file instead of computing one.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["unitary", "input"])]
    pub from: Option<PathBuf>,
    /// Omit outcomes with probability below this threshold from the output.
    #[arg(long, value_name = "P")]
    pub prune: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CorrectionArgs {
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Injected photon number.
    #[arg(long)]
    pub n: usize,
    /// Values of K (array) or of the dead-time ratio: `a:b` for the integers
    /// a…b, `a:b:count` for evenly spaced points, or a comma-separated list.
    #[arg(long, value_name = "SPEC")]
    pub sweep: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep only samples whose total count equals the photon number.
    #[arg(long)]
    pub postselect: bool,
    /// Sample ideal outcomes and pass each through simulated detectors
    /// instead of drawing from the exact count distribution.
    #[arg(long)]
    pub simulate_detectors: bool,
}

#[derive(Debug, Args)]
pub struct PkmArgs {
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Largest photon number in the table.
    #[arg(long, default_value_t = 12)]
    pub max_m: usize,
    /// Gauss–Legendre nodes per panel for the exponential-mode integrals.
    #[arg(long, default_value_t = 16)]
    pub quad_nodes: usize,
    /// Absolute tolerance for the exponential-mode integrals.
    #[arg(long, default_value_t = 1e-6)]
    pub quad_tol: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
