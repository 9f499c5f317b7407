//! Command-line interface: offline planning, log conversion and the server.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use optlab_core::catalog::{load_catalog, tpch_like, Catalog, TPCH_LIKE};
use optlab_core::cost::{CostParams, CostParamsOverride};
use optlab_core::log::{emit_optimizer_log, parse_optimizer_log, LogDocument};
use optlab_core::pipeline::optimize;
use optlab_core::trace::serialize_trace;

use crate::api::router;
use crate::history::HistoryStore;
use crate::service::Service;

#[derive(Debug, Parser)]
#[command(name = "optlab", version, about = "Join-order optimizer laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan one query and write its trace.
    Plan(PlanArgs),
    /// Convert an optimizer log into a trace.
    ParseLog(ParseLogArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Bundled catalog name or path to a catalog JSON file.
    #[arg(long, default_value = TPCH_LIKE)]
    pub catalog: String,
    /// Query text, or `@path` to read it from a file.
    #[arg(long)]
    pub sql: String,
    #[arg(long, env = "JOVIS_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub geqo_threshold: Option<u32>,
    /// Also write the textual optimizer log.
    #[arg(long)]
    pub emit_log: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ParseLogArgs {
    pub path: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "JOVIS_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// JSONL history file; history is kept in memory when omitted.
    #[arg(long, env = "JOVIS_HISTORY")]
    pub history: Option<PathBuf>,
    /// Directory of additional catalog JSON files.
    #[arg(long)]
    pub catalog_dir: Option<PathBuf>,
    /// Static UI bundle served from `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    #[arg(long, env = "JOVIS_SEED")]
    pub seed: Option<u64>,
}

pub type CliResult = Result<(), Box<dyn std::error::Error>>;

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Plan(args) => plan(&args),
        Command::ParseLog(args) => parse_log(&args),
        Command::Serve(args) => serve(args),
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn resolve_catalog(spec: &str) -> Result<Catalog, Box<dyn std::error::Error>> {
    if spec.eq_ignore_ascii_case(TPCH_LIKE) {
        return Ok(tpch_like());
    }
    Ok(load_catalog(spec)?)
}

pub fn plan(args: &PlanArgs) -> CliResult {
    let catalog = resolve_catalog(&args.catalog)?;
    let sql = match args.sql.strip_prefix('@') {
        Some(path) => read_file(Path::new(path))?,
        None => args.sql.clone(),
    };
    let params = CostParamsOverride {
        rng_seed: args.seed,
        geqo_threshold: args.geqo_threshold,
        ..CostParamsOverride::default()
    }
    .apply(&CostParams::default())?;
    let id = uuid::Uuid::new_v4().to_string();
    let trace = optimize(&sql, &catalog, &params, &id).map_err(|e| match e.position() {
        Some((line, column)) => format!("{} at line {line}, column {column}: {e}", e.code()),
        None => format!("{}: {e}", e.code()),
    })?;
    for run in &trace.runs {
        for warning in &run.warnings {
            eprintln!("warning [{}]: {warning}", run.label);
        }
    }
    write_file(&args.out, &serialize_trace(&trace))?;
    if let Some(path) = &args.emit_log {
        write_file(path, &emit_optimizer_log(&trace).to_text())?;
    }
    Ok(())
}

pub fn parse_log(args: &ParseLogArgs) -> CliResult {
    let bytes = std::fs::read(&args.path).map_err(|e| format!("{}: {e}", args.path.display()))?;
    let trace = parse_optimizer_log(&LogDocument::from_bytes(&bytes))?;
    for run in &trace.runs {
        for warning in &run.warnings {
            eprintln!("warning [{}]: {warning}", run.label);
        }
    }
    write_file(&args.out, &serialize_trace(&trace))?;
    Ok(())
}

pub fn serve(args: ServeArgs) -> CliResult {
    let params = CostParamsOverride {
        rng_seed: args.seed,
        ..CostParamsOverride::default()
    }
    .apply(&CostParams::default())?;
    let history = match &args.history {
        Some(path) => HistoryStore::open(path)?,
        None => HistoryStore::in_memory(),
    };
    let service = Service::new(params, history, args.catalog_dir.as_deref())?;
    let app = router(Arc::new(service), args.ui_dir);
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    Ok(())
}
