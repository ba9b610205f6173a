use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use relint_core::bounds::DEFAULT_DELTA;
use relint_core::classify::{DEFAULT_COVERAGE, DEFAULT_PROBES};

#[derive(Debug, Parser)]
#[command(name = "relint", version, about = "Feature relevance intervals for linear classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyse a CSV dataset and write the JSON report.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic dataset with known relevance.
    Simulate(SimulateArgs),
    /// Score feature selection on simulated configurations.
    Benchmark(BenchmarkArgs),
    /// Run the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisFlags {
    /// Allowed relative growth of the L1 norm over the baseline.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Coverage of the probe prediction interval.
    #[arg(long = "pi-p", default_value_t = DEFAULT_COVERAGE)]
    pub pi_p: f64,
    /// Number of permutation probes.
    #[arg(long, default_value_t = DEFAULT_PROBES)]
    pub probes: usize,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input CSV with a header row.
    pub input: PathBuf,
    /// Name of the label column.
    #[arg(long, default_value = "label")]
    pub label: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub analysis: AnalysisFlags,
    /// Report path; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub strong: usize,
    #[arg(long)]
    pub weak: usize,
    #[arg(long)]
    pub irrelevant: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Weak group sizes, e.g. `4,4`.
    #[arg(long, value_delimiter = ',')]
    pub groups: Option<Vec<usize>>,
    /// Noise added to members of a weak group.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Share of labels flipped after generation.
    #[arg(long, default_value_t = 0.0)]
    pub flip_rate: f64,
    /// Writes `<prefix>.csv` and `<prefix>.truth.csv`.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, default_value_t = 10)]
    pub replicates: usize,
    /// JSON list of `{name, spec}` configurations; the built-in five when absent.
    #[arg(long)]
    pub configs: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisFlags,
    /// Report path; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the one-row-per-configuration CSV summary here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Zero the wall-clock fields so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "RELINT_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Seconds of inactivity before a session is dropped.
    #[arg(long, default_value_t = 3600)]
    pub ttl: u64,
    /// Seconds allowed for one constraint recomputation.
    #[arg(long, default_value_t = 60)]
    pub budget: u64,
    /// Allowed CORS origin; repeatable. Any origin when absent.
    #[arg(long = "cors-origin")]
    pub cors_origins: Vec<String>,
    /// Directory of static files served next to the API.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}
