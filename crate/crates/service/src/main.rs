use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use exdialog::codec::BoundaryMode;
use exdialog_service::commands::{self, StatsFormat};
use exdialog_service::config::{PartialConfig, ServiceConfig};

#[derive(Parser)]
#[command(name = "exdialog", version, about = "Explanation dialogue engine and session server")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP and WebSocket session server.
    Serve {
        #[arg(long, env = "EXDIALOG_PORT")]
        port: Option<u16>,
        /// Directory holding one log per session.
        #[arg(long = "data", env = "EXDIALOG_DATA_DIR")]
        data_dir: Option<PathBuf>,
        /// TOML file with `data_dir`, `port` and `session_timeout_secs`.
        #[arg(long, env = "EXDIALOG_CONFIG")]
        config: Option<PathBuf>,
        /// Idle seconds before a session is closed.
        #[arg(long = "timeout", env = "EXDIALOG_SESSION_TIMEOUT")]
        session_timeout_secs: Option<u64>,
    },
    /// Validate tag traces, one JSON record per line.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus statistics. `.tags` files are traces, others coded transcripts.
    Stats {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Extra trace files, whatever their extension.
        #[arg(long)]
        traces: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Require begin and end markers around every coded dialogue.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate dialogues between the scripted explainer and a random explainee.
    Simulate {
        #[arg(long)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value_t = 20)]
        max_moves: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild a session's state from its log.
    Replay { log: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn emit(text: String, out: Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Serve {
            port,
            data_dir,
            config,
            session_timeout_secs,
        } => {
            let overrides = PartialConfig {
                data_dir,
                port,
                session_timeout_secs,
            };
            let config = ServiceConfig::load(config.as_deref(), overrides)?;
            tokio::runtime::Runtime::new()?.block_on(exdialog_service::http::serve(config))
        }
        Command::Validate { files, out } => emit(commands::validate_files(&files)?, out),
        Command::Stats {
            files,
            mut traces,
            format,
            strict,
            out,
        } => {
            let format = match format {
                Format::Csv => StatsFormat::Csv,
                Format::Json => StatsFormat::Json,
            };
            let mode = if strict {
                BoundaryMode::Strict
            } else {
                BoundaryMode::Lenient
            };
            let (tag_files, coded): (Vec<_>, Vec<_>) = files.into_iter().partition(|p| commands::is_trace_file(p));
            traces.extend(tag_files);
            emit(commands::stats(&coded, &traces, mode, format)?, out)
        }
        Command::Simulate {
            episodes,
            seed,
            kb,
            policy,
            max_moves,
            out,
        } => emit(commands::simulate(episodes, seed, &kb, &policy, max_moves)?, out),
        Command::Replay { log } => emit(commands::replay(&log)?, None),
    }
}
