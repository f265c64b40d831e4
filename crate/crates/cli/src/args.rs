use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "curstat",
    version,
    about = "Nonparametric estimation from current status data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate estimators of F, f or the hazard on a grid of times.
    Estimate(EstimateArgs),
    /// Choose a pointwise bandwidth by the smoothed bootstrap.
    Bandwidth(BandwidthArgs),
    /// Replicate an estimator on simulated samples.
    Simulate(SimulateArgs),
    /// Bootstrap, Monte Carlo and theoretical bandwidth constants at t = 4 and t = 6.5.
    #[command(name = "reproduce-table1")]
    ReproduceTable1(TableArgs),
}

#[derive(Debug, Args)]
pub struct Smoothing {
    /// Explicit bandwidth.
    #[arg(long, conflicts_with_all = ["c", "select_bootstrap"])]
    pub h: Option<f64>,
    /// Bandwidth constant: h = c·n^(-alpha).
    #[arg(long, conflicts_with = "select_bootstrap")]
    pub c: Option<f64>,
    /// Rate exponent paired with --c; defaults to 1/5 for F and 1/7 for f and lambda.
    #[arg(long, requires = "c")]
    pub alpha: Option<f64>,
    /// Choose the bandwidth by the smoothed bootstrap at the single --t point.
    #[arg(long)]
    pub select_bootstrap: bool,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    /// Bootstrap sample size; defaults to n/5.
    #[arg(long)]
    pub m: Option<u64>,
    /// Number of bootstrap replicates.
    #[arg(long = "B", default_value_t = 500)]
    pub b: usize,
    /// Pilot constant; the pilot bandwidth is c0·n^(-1/5).
    #[arg(long, default_value_t = 10.0)]
    pub c0: f64,
    /// Smallest candidate constant; defaults to c0/10.
    #[arg(long)]
    pub c_min: Option<f64>,
    /// Largest candidate constant; defaults to 10·c0.
    #[arg(long)]
    pub c_max: Option<f64>,
    /// Number of log-spaced candidate constants.
    #[arg(long, default_value_t = 60)]
    pub c_points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV with header "t,delta".
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Comma-separated subset of mle, naive, msle, smle.
    #[arg(long, value_delimiter = ',', default_value = "mle")]
    pub method: Vec<String>,
    /// Comma-separated subset of F, f, lambda.
    #[arg(long, value_delimiter = ',', default_value = "F")]
    pub target: Vec<String>,
    #[arg(long, default_value = "triweight")]
    pub kernel: String,
    #[command(flatten)]
    pub smoothing: Smoothing,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    /// Comma-separated evaluation times; replaces the default grid.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Number of points of the default uniform grid over [0, T_max + h].
    #[arg(long, default_value_t = 401)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct BandwidthArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output JSON; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// msle or smle.
    #[arg(long, default_value = "smle")]
    pub method: String,
    #[arg(long, default_value = "F")]
    pub target: String,
    #[arg(long, default_value = "triweight")]
    pub kernel: String,
    /// Evaluation point.
    #[arg(long)]
    pub t: f64,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "gamma4-exp3")]
    pub truth: String,
    #[arg(long, default_value = "smle")]
    pub method: String,
    #[arg(long, default_value = "F")]
    pub target: String,
    #[arg(long, default_value = "triweight")]
    pub kernel: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long = "B")]
    pub b: usize,
    #[arg(long)]
    pub t: f64,
    /// Explicit bandwidth.
    #[arg(long, conflicts_with = "c")]
    pub h: Option<f64>,
    /// Bandwidth constant; defaults to the aMSE-optimal constant at t.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub m: usize,
    #[arg(long = "B", default_value_t = 100)]
    pub b: usize,
    /// Pilot constants, one bootstrap row each.
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25")]
    pub c0: Vec<f64>,
    /// Candidate range for the Monte Carlo rows (bootstrap rows use c0/10..10·c0).
    #[arg(long, default_value_t = 1.0)]
    pub c_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub c_max: f64,
    #[arg(long, default_value_t = 60)]
    pub c_points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "triweight")]
    pub kernel: String,
}
