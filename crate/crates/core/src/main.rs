use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use hades::service::pipeline::{self, StageOutcome};
use hades::service::{serve, AppConfig, ServiceError};

/// Comparative topic analysis of similarly structured documents.
#[derive(Debug, Parser)]
#[command(name = "hades", version)]
struct Cli {
    /// Suppress progress events on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the corpus from a manifest.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        /// Work directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Select and fit a topic model per section.
    Fit {
        /// Work directory written by `ingest`.
        #[arg(long)]
        corpus: PathBuf,
        /// `all` or a comma-separated list of section ids.
        #[arg(long, default_value = "all")]
        sections: String,
        /// Pipeline configuration (JSON); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Distances, clusterings, mappings, term rankings and correlations.
    Analyze {
        /// `models` directory written by `fit`.
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Topic labels and per-section summaries.
    Summarize {
        #[arg(long)]
        corpus: PathBuf,
        /// Deterministic offline LLM.
        #[arg(long)]
        stub: bool,
        #[arg(long)]
        force: bool,
    },
    /// Write the analysis bundle read by `run-app`.
    Export {
        #[arg(long)]
        out: PathBuf,
        /// Work directory holding the stage outputs.
        #[arg(long, default_value = ".")]
        corpus: PathBuf,
    },
    /// Serve the bundle over HTTP.
    RunApp {
        #[arg(long)]
        config: PathBuf,
    },
}

fn emit(quiet: bool) -> impl Fn(serde_json::Value) + Sync {
    move |event| {
        if !quiet {
            let mut err = std::io::stderr().lock();
            let _ = writeln!(err, "{event}");
        }
    }
}

fn run_app(config_path: &Path, progress: &(dyn Fn(serde_json::Value) + Sync)) -> Result<StageOutcome, ServiceError> {
    let config = AppConfig::load(config_path)?;
    if !config.bundle.join("manifest.json").is_file() {
        return Err(ServiceError::Io {
            path: config.bundle.join("manifest.json"),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "bundle manifest not found"),
        });
    }
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|source| ServiceError::Io {
            path: config_path.to_path_buf(),
            source,
        })?;
    runtime.block_on(serve(config, |addr| {
        progress(json!({"event": "listening", "address": addr.to_string(), "url": format!("http://{addr}/api/meta")}));
    }))?;
    Ok(StageOutcome::Ran)
}

fn run(cli: Cli) -> Result<StageOutcome, ServiceError> {
    let progress = emit(cli.quiet);
    let progress: &(dyn Fn(serde_json::Value) + Sync) = &progress;
    match cli.command {
        Command::Ingest { manifest, out, force } => pipeline::run_ingest(&manifest, &out, force, progress),
        Command::Fit {
            corpus,
            sections,
            config,
            force,
        } => {
            let config = pipeline::load_pipeline_config(config.as_deref())?;
            pipeline::run_fit(&corpus, &sections, &config, force, progress)
        }
        Command::Analyze { models, force } => pipeline::run_analyze(&models, force, progress),
        Command::Summarize { corpus, stub, force } => pipeline::run_summarize(&corpus, stub, force, progress),
        Command::Export { out, corpus } => pipeline::run_export(&corpus, &out, progress),
        Command::RunApp { config } => run_app(&config, progress),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hades: error: {e}");
            if e.exit_code() == 1 {
                eprintln!("usage: hades <ingest|fit|analyze|summarize|export|run-app> [OPTIONS] (see --help)");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
