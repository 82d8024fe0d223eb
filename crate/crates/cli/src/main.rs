use std::path::PathBuf;
use std::process::ExitCode;

use caseflow_cli::pipeline::exit;
use caseflow_cli::{run, spec, CliError, RunConfig};
use caseflow_service::{ConfigLayer, ServiceConfig};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "caseflow", version, about = "Case-based clustering, SOM and scenario workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the analysis pipeline and write a report bundle.
    Run(RunArgs),
    /// Start the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV of cases.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Treat the first row as data rather than a header.
    #[arg(long)]
    no_header: bool,
    #[arg(long)]
    separator: Option<char>,
    /// Column holding case ids.
    #[arg(long)]
    id_column: Option<String>,
    /// K-means options, e.g. `k=3,n_init=20,scaled=true`.
    #[arg(long)]
    kmeans: Option<String>,
    /// SOM options, e.g. `grid=5x5,iterations=5000`.
    #[arg(long)]
    som: Option<String>,
    /// Cluster edit, e.g. `cluster=0,x=1.5`. Repeatable.
    #[arg(long)]
    intervention: Vec<String>,
    /// Sensitivity run, e.g. `cluster=0,samples=1000,x=0.2`. Repeatable.
    #[arg(long)]
    sensitivity: Vec<String>,
    /// CSV of new cases to classify.
    #[arg(long)]
    predict: Option<PathBuf>,
    /// Seed applied to every stage.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed report timestamp (RFC 3339).
    #[arg(long)]
    timestamp: Option<DateTime<Utc>>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// TOML service configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Listen address, e.g. 127.0.0.1:8080.
    #[arg(long)]
    bind: Option<String>,
    /// Directory for session snapshots.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Idle time after which sessions are dropped.
    #[arg(long)]
    idle_expiry_secs: Option<u64>,
    /// Allowed browser origin. Repeatable; `*` allows any.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
}

fn build_run_config(a: RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let usage = CliError::Usage;
    if a.data.is_some() {
        cfg.data = a.data;
    }
    if a.no_header {
        cfg.csv.header = Some(false);
    }
    if a.separator.is_some() {
        cfg.csv.separator = a.separator;
    }
    if a.id_column.is_some() {
        cfg.csv.id_column = a.id_column;
    }
    if let Some(k) = &a.kmeans {
        cfg.kmeans = Some(spec::kmeans(k, cfg.kmeans.take().unwrap_or_default()).map_err(usage)?);
    }
    if let Some(s) = &a.som {
        cfg.som = Some(spec::som(s, cfg.som.take().unwrap_or_default()).map_err(usage)?);
    }
    if !a.intervention.is_empty() {
        cfg.intervention = a
            .intervention
            .iter()
            .map(|s| spec::intervention(s))
            .collect::<Result<_, _>>()
            .map_err(usage)?;
    }
    if !a.sensitivity.is_empty() {
        cfg.sensitivity = a
            .sensitivity
            .iter()
            .map(|s| spec::sensitivity(s))
            .collect::<Result<_, _>>()
            .map_err(usage)?;
    }
    if a.predict.is_some() {
        cfg.predict = a.predict;
    }
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    if a.out.is_some() {
        cfg.out = a.out;
    }
    if a.timestamp.is_some() {
        cfg.timestamp = a.timestamp;
    }
    Ok(cfg)
}

fn serve(a: ServeArgs) -> Result<(), CliError> {
    let flags = ConfigLayer {
        bind: a.bind,
        data_dir: a.data_dir,
        idle_expiry_secs: a.idle_expiry_secs,
        cors_origins: (!a.cors_origins.is_empty()).then_some(a.cors_origins),
    };
    let config = ServiceConfig::load(flags, a.config.as_deref()).map_err(|e| CliError::Usage(e.to_string()))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Server(e.to_string()))?;
    rt.block_on(caseflow_service::serve(config))
        .map_err(|e| CliError::Server(e.to_string()))
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "caseflow_service=info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => build_run_config(a).and_then(|cfg| run(&cfg)).map(|out| {
            for f in &out.files {
                println!("{}", f.display());
            }
        }),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("caseflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
