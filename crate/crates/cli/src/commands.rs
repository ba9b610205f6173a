use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use relint_core::data::{load_csv, simulate, write_csv, write_ground_truth, DataError, SimulationSpec};
use relint_core::evalharness::{default_configs, run_benchmark, BenchmarkConfig};
use relint_core::pool::WorkerPool;
use relint_core::{analyze, AnalysisError, AnalysisParams};
use relint_service::{AppState, ServiceConfig, SystemClock};

use crate::args::{AnalysisFlags, AnalyzeArgs, BenchmarkArgs, Cli, Command, ServeArgs, SimulateArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 when an optimization failed, 1 for everything the user can fix.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Analysis(e) if e.is_optimization_failure() => 2,
            Self::Failed(_) => 2,
            _ => 1,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn pool(workers: Option<usize>) -> WorkerPool {
    workers.map_or_else(WorkerPool::available, WorkerPool::new)
}

fn params(flags: &AnalysisFlags, seed: u64) -> AnalysisParams {
    AnalysisParams {
        delta: flags.delta,
        coverage: flags.pi_p,
        n_probes: flags.probes,
        seed,
        ..Default::default()
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(io_error(path)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(io_error(Path::new("<stdout>"))),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let data = load_csv(&args.input, &args.label)?;
    let analysis = analyze(&data, &params(&args.analysis, args.seed), &pool(args.analysis.workers))?;
    emit(args.output.as_deref(), &analysis.report().to_json())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let spec = SimulationSpec {
        weak_groups: args.groups,
        weak_jitter: args.jitter,
        label_flip_rate: args.flip_rate,
        ..SimulationSpec::new(args.strong, args.weak, args.irrelevant, args.samples, args.seed)
    };
    let (data, truth) = simulate(&spec)?;
    let prefix = args.output.as_os_str().to_string_lossy().into_owned();
    let data_path = PathBuf::from(format!("{prefix}.csv"));
    let truth_path = PathBuf::from(format!("{prefix}.truth.csv"));
    let file = File::create(&data_path).map_err(io_error(&data_path))?;
    write_csv(&data, BufWriter::new(file))?;
    let file = File::create(&truth_path).map_err(io_error(&truth_path))?;
    write_ground_truth(data.feature_names(), &truth, BufWriter::new(file))?;
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<(), CliError> {
    let configs: Vec<BenchmarkConfig> = match &args.configs {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_error(path))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => default_configs(),
    };
    if args.replicates == 0 {
        return Err(CliError::Input("--replicates must be at least 1".into()));
    }
    let mut report =
        run_benchmark(&configs, args.replicates, &params(&args.analysis, 0), &pool(args.analysis.workers))?;
    if args.no_timing {
        report = report.without_timing();
    }
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    emit(args.output.as_deref(), &json)?;
    if let Some(path) = &args.summary {
        std::fs::write(path, report.summary_csv()).map_err(io_error(path))?;
    }
    for c in &report.configs {
        eprintln!(
            "{}: f1 {:.3} precision {:.3} recall {:.3} ({} of {} failed)",
            c.name, c.f1_mean, c.precision_mean, c.recall_mean, c.failed, c.replicates
        );
    }
    let dead: Vec<&str> = report
        .configs
        .iter()
        .filter(|c| c.failed == c.replicates)
        .map(|c| c.name.as_str())
        .collect();
    if !dead.is_empty() {
        return Err(CliError::Failed(format!("every replicate failed for {}", dead.join(", "))));
    }
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<(), CliError> {
    let config = ServiceConfig {
        ttl: Duration::from_secs(args.ttl),
        compute_budget: Duration::from_secs(args.budget),
        cors_origins: args.cors_origins,
        static_dir: args.static_dir,
        ..Default::default()
    };
    let state = AppState::new(config, pool(args.workers), Arc::new(SystemClock));
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| CliError::Input(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async move {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::Input(format!("cannot listen on {addr}: {e}")))?;
        let local = listener.local_addr().map_err(io_error(Path::new(&addr)))?;
        eprintln!("listening on http://{local}");
        relint_service::serve(listener, state, shutdown_signal())
            .await
            .map_err(io_error(Path::new(&addr)))
    })
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        if let Ok(mut term) = signal(SignalKind::terminate()) {
            tokio::select! {
                _ = tokio::signal::ctrl_c() => {}
                _ = term.recv() => {}
            }
            return;
        }
    }
    let _ = tokio::signal::ctrl_c().await;
}
