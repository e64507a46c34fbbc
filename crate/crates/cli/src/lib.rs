//! The `catalogue` command.
//!
//! Exit codes: 0 success, 1 data or query error, 2 usage or configuration
//! error. Only the payload goes to stdout; diagnostics go to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use catalogue_api::config::DEFAULT_STATS_FEATURES;
use catalogue_api::routes::parse_feature_list;
use catalogue_api::{select_datasets, stats_payload, ApiError, Service, ServiceConfig};
use catalogue_core::{ingest, to_json_payload, CatalogSnapshot, Schema, SourceFormat};
use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "catalogue", version, about = "Dataset metadata catalogue service and tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service with its refresh scheduler.
    Serve {
        #[arg(long, env = "CATALOGUE_CONFIG")]
        config: PathBuf,
        /// Overrides the configured port.
        #[arg(long, env = "CATALOGUE_PORT")]
        port: Option<u16>,
    },
    /// Filter and project records, printing the same JSON as `GET /datasets`.
    Query {
        #[command(flatten)]
        catalogue: CatalogueArgs,
        #[arg(long)]
        query: Option<String>,
        /// Comma-separated feature names.
        #[arg(long)]
        features: Option<String>,
    },
    /// Print unique values per feature, as `GET /datasets/tags`.
    Tags {
        #[command(flatten)]
        catalogue: CatalogueArgs,
        #[arg(long)]
        features: Option<String>,
    },
    /// Print the feature names declared by a schema file.
    Schema {
        #[arg(long)]
        schema: PathBuf,
    },
    /// Print value counts, as `GET /datasets/stats`.
    Stats {
        #[command(flatten)]
        catalogue: CatalogueArgs,
        /// Defaults to the service's default chart features.
        #[arg(long)]
        features: Option<String>,
    },
    /// Report ingestion diagnostics; exits 1 when there are any.
    Validate {
        #[command(flatten)]
        catalogue: CatalogueArgs,
    },
}

#[derive(Debug, Args)]
pub struct CatalogueArgs {
    /// CSV or JSON metadata file.
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Source format; guessed from the file extension when omitted.
    #[arg(long)]
    pub format: Option<SourceFormat>,
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }
}

impl From<ApiError> for Failure {
    fn from(err: ApiError) -> Self {
        let mut message = err.body.error.clone();
        if let Some(detail) = &err.body.detail {
            message = format!("{message}: {detail}");
        }
        if let Some(offset) = err.body.offset {
            message = format!("{message} (offset {offset})");
        }
        Failure::data(message)
    }
}

fn load_schema(path: &Path) -> Result<Arc<Schema>, Failure> {
    Schema::load(path).map(Arc::new).map_err(|e| Failure::usage(e.to_string()))
}

struct Loaded {
    snapshot: CatalogSnapshot,
    diagnostics: Vec<catalogue_core::Diagnostic>,
}

fn load(args: &CatalogueArgs) -> Result<Loaded, Failure> {
    let schema = load_schema(&args.schema)?;
    let raw = std::fs::read(&args.source)
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", args.source.display())))?;
    let format = args
        .format
        .unwrap_or_else(|| SourceFormat::from_location(&args.source.to_string_lossy()));
    let ingested = ingest(&raw, format, &schema).map_err(|e| Failure::data(e.to_string()))?;
    Ok(Loaded {
        snapshot: CatalogSnapshot::offline(schema, ingested.records),
        diagnostics: ingested.diagnostics,
    })
}

fn warn_diagnostics(loaded: &Loaded, err: &mut dyn Write) {
    if !loaded.diagnostics.is_empty() {
        let _ = writeln!(
            err,
            "warning: {} ingestion issue(s); run `catalogue validate` for details",
            loaded.diagnostics.len()
        );
    }
}

/// Runs every subcommand except `serve`, writing the payload to `out`.
pub fn run_offline(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let payload = match command {
        Command::Serve { .. } => return Err(Failure::usage("serve is not an offline command")),
        Command::Query { catalogue, query, features } => {
            let loaded = load(catalogue)?;
            warn_diagnostics(&loaded, err);
            let rows = select_datasets(&loaded.snapshot, query.as_deref(), features.as_deref())?;
            to_json_payload(&rows)
        }
        Command::Tags { catalogue, features } => {
            let loaded = load(catalogue)?;
            warn_diagnostics(&loaded, err);
            let features = parse_feature_list(features.as_deref());
            let tags = loaded
                .snapshot
                .unique_tags(&features)
                .map_err(|e| Failure::data(e.to_string()))?;
            to_json_payload(&tags)
        }
        Command::Schema { schema } => {
            let schema = load_schema(schema)?;
            to_json_payload(&schema.names().collect::<Vec<_>>())
        }
        Command::Stats { catalogue, features } => {
            let loaded = load(catalogue)?;
            warn_diagnostics(&loaded, err);
            let features = match features {
                Some(f) => parse_feature_list(Some(f)),
                None => DEFAULT_STATS_FEATURES.iter().map(|s| s.to_string()).collect(),
            };
            for f in &features {
                if loaded.snapshot.schema().position(f).is_none() {
                    return Err(Failure::data(format!("unknown feature {f:?}")));
                }
            }
            to_json_payload(&stats_payload(&loaded.snapshot, &features))
        }
        Command::Validate { catalogue } => {
            let loaded = load(catalogue)?;
            let mut text = String::new();
            for d in &loaded.diagnostics {
                text.push_str(&format!("{d}\n"));
            }
            let n = loaded.diagnostics.len();
            text.push_str(&format!("{n} issue{}\n", if n == 1 { "" } else { "s" }));
            out.write_all(text.as_bytes()).map_err(|e| Failure::data(e.to_string()))?;
            return if n == 0 {
                Ok(())
            } else {
                Err(Failure::data(format!("{} records, {n} issue(s)", loaded.snapshot.len())))
            };
        }
    };
    out.write_all(payload.as_bytes()).map_err(|e| Failure::data(e.to_string()))
}

/// Loads the config and runs the service until Ctrl-C.
pub fn serve(config: &Path, port: Option<u16>) -> Result<(), Failure> {
    let mut cfg = ServiceConfig::load(config).map_err(|e| Failure::usage(e.to_string()))?;
    if let Some(port) = port {
        cfg.port = port;
    }
    let port = cfg.port;
    let service = Service::from_config(cfg).map_err(|e| Failure::usage(e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::data(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", port))
            .await
            .map_err(|e| Failure::usage(format!("cannot listen on port {port}: {e}")))?;
        tracing::info!(addr = %listener.local_addr().map_err(|e| Failure::data(e.to_string()))?, "listening");
        service
            .serve(listener, async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Failure::data(e.to_string()))
    })
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Serve { config, port } => serve(config, *port),
        other => run_offline(other, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}
