use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use svqkd::noise::DetectionPolicy;

#[derive(Debug, Parser)]
#[command(name = "svqkd", version, about = "Svetlichny-based multi-party DIQKD analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Args)]
pub struct CommonOpts {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the output to a file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Omit the timestamp from JSON metadata
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical and threshold accuracies for a range of party counts
    Thresholds(ThresholdsArgs),
    /// Key rate and its ingredients along an accuracy grid
    KeyrateCurve(KeyrateArgs),
    /// Three-party Werner key rate over the visibility-accuracy plane
    WernerGrid(WernerArgs),
    /// Monte Carlo run of the protocol, compared with the closed forms
    Simulate(SimulateArgs),
    /// Accuracy implied by detector parameters and the resulting verdicts
    Detector(DetectorArgs),
}

#[derive(Debug, Args)]
pub struct ThresholdsArgs {
    #[arg(long, default_value_t = 3)]
    pub n_min: usize,

    #[arg(long, default_value_t = 10)]
    pub n_max: usize,

    /// Largest party count accepted
    #[arg(long, default_value_t = 10)]
    pub max_parties: usize,
}

#[derive(Debug, Args)]
pub struct KeyrateArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    #[arg(long, default_value_t = 0.5)]
    pub p_start: f64,

    #[arg(long, default_value_t = 1.0)]
    pub p_end: f64,

    /// Number of grid points, endpoints included
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WernerTable {
    Grid,
    Boundary,
}

#[derive(Debug, Args)]
pub struct WernerArgs {
    /// Visibility grid points over [0, 1]
    #[arg(long, default_value_t = 51)]
    pub v_steps: usize,

    /// Accuracy grid points over [1/2, 1]
    #[arg(long, default_value_t = 51)]
    pub p_steps: usize,

    /// Table written in CSV mode; JSON carries both
    #[arg(long, value_enum, default_value_t = WernerTable::Grid)]
    pub table: WernerTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceKind {
    Ghz,
    Werner,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    /// Measurement accuracy of every party
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,

    #[arg(long, default_value_t = 1_000_000)]
    pub rounds: u64,

    #[arg(long, env = "SVQKD_SEED", default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = SourceKind::Ghz)]
    pub source: SourceKind,

    /// Werner visibility
    #[arg(long, required_if_eq("source", "werner"))]
    pub v: Option<f64>,

    /// Relative weights of the first party's four angles
    #[arg(long, value_delimiter = ',', num_args = 4, default_value = "1,1,1,1")]
    pub setting_weights: Vec<f64>,

    /// Worker threads; results do not depend on this
    #[arg(long)]
    pub workers: Option<usize>,

    /// Include the raw key bits in the JSON report
    #[arg(long)]
    pub retain_keys: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    FairSampling,
    BindUndetected,
}

impl From<PolicyArg> for DetectionPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::FairSampling => DetectionPolicy::FairSampling,
            PolicyArg::BindUndetected => DetectionPolicy::BindUndetected,
        }
    }
}

#[derive(Debug, Args)]
pub struct DetectorArgs {
    /// Rate at which the instrument reflects the qubit state correctly
    #[arg(long)]
    pub q1: f64,

    /// Detection efficiency
    #[arg(long, default_value_t = 1.0)]
    pub q2: f64,

    #[arg(long, value_enum, default_value_t = PolicyArg::BindUndetected)]
    pub policy: PolicyArg,

    /// Party counts to compare against
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub n: Vec<usize>,
}
