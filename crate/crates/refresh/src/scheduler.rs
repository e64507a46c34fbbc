//! Periodic fetch, rebuild and publish.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use catalogue_core::Schema;
use serde::Serialize;
use tokio::task::JoinHandle;
use tokio::time::MissedTickBehavior;

use crate::cell::SnapshotCell;
use crate::provider::Providers;
use crate::rebuild::{rebuild, RebuildConfig, Rebuilt};
use crate::source::{fetch_source, FetchFailure, Fetched, SourceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// A new version went live.
    Published,
    /// Source checksum unchanged; nothing rebuilt.
    Unchanged,
    /// Fetch or rebuild failed; the live snapshot stays.
    Failed,
    /// The previous refresh was still running; tick skipped.
    Overrun,
}

/// One line of the tick log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TickRecord {
    /// Unix time in milliseconds.
    pub ts: u64,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<u64>,
    pub duration_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// In-memory tick history, optionally mirrored to a JSON-lines file.
#[derive(Debug, Default)]
pub struct TickLog {
    history: Mutex<Vec<TickRecord>>,
    file: Option<Mutex<File>>,
}

impl TickLog {
    pub fn to_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            history: Mutex::default(),
            file: Some(Mutex::new(file)),
        })
    }

    pub fn record(&self, record: TickRecord) {
        let line = serde_json::to_string(&record).expect("tick record serializes");
        tracing::info!(target: "catalogue::refresh", "{line}");
        if let Some(file) = &self.file {
            let mut file = file.lock().unwrap_or_else(|e| e.into_inner());
            if let Err(e) = writeln!(file, "{line}") {
                tracing::error!(error = %e, "cannot write tick log");
            }
        }
        self.history.lock().unwrap_or_else(|e| e.into_inner()).push(record);
    }

    pub fn history(&self) -> Vec<TickRecord> {
        self.history.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

type FetchFn = dyn Fn(&SourceConfig) -> Result<Fetched, FetchFailure> + Send + Sync;

/// Everything one refresh needs, shared by the scheduler task.
pub struct Pipeline {
    source: SourceConfig,
    schema: Arc<Schema>,
    providers: Providers,
    rebuild: RebuildConfig,
    cell: Arc<SnapshotCell>,
    log: TickLog,
    busy: AtomicBool,
    fetch: Box<FetchFn>,
}

impl Pipeline {
    pub fn new(
        source: SourceConfig,
        schema: Arc<Schema>,
        providers: Providers,
        rebuild: RebuildConfig,
        cell: Arc<SnapshotCell>,
    ) -> Self {
        Self {
            source,
            schema,
            providers,
            rebuild,
            cell,
            log: TickLog::default(),
            busy: AtomicBool::new(false),
            fetch: Box::new(fetch_source),
        }
    }

    pub fn with_log(mut self, log: TickLog) -> Self {
        self.log = log;
        self
    }

    /// Replaces the source fetcher.
    pub fn with_fetcher(
        mut self,
        fetch: impl Fn(&SourceConfig) -> Result<Fetched, FetchFailure> + Send + Sync + 'static,
    ) -> Self {
        self.fetch = Box::new(fetch);
        self
    }

    pub fn cell(&self) -> &Arc<SnapshotCell> {
        &self.cell
    }

    pub fn log(&self) -> &TickLog {
        &self.log
    }

    pub fn is_busy(&self) -> bool {
        self.busy.load(Ordering::SeqCst)
    }

    /// Runs one fetch-rebuild-publish cycle on the calling thread, unless
    /// another cycle is in progress. Blocking.
    pub fn refresh_once(&self) -> TickRecord {
        let started = Instant::now();
        let ts = now_millis();
        if self.busy.swap(true, Ordering::SeqCst) {
            let record = TickRecord {
                ts,
                outcome: Outcome::Overrun,
                version: self.cell.version(),
                duration_ms: 0,
                error: None,
            };
            self.log.record(record.clone());
            return record;
        }
        let (outcome, error) = self.cycle();
        self.busy.store(false, Ordering::SeqCst);
        let record = TickRecord {
            ts,
            outcome,
            version: self.cell.version(),
            duration_ms: started.elapsed().as_millis() as u64,
            error,
        };
        self.log.record(record.clone());
        record
    }

    fn cycle(&self) -> (Outcome, Option<String>) {
        let fetched = match (self.fetch)(&self.source) {
            Ok(f) => f,
            Err(e) => return (Outcome::Failed, Some(e.to_string())),
        };
        let prev = self.cell.load();
        match rebuild(&fetched, prev.as_ref(), &self.schema, &self.providers, &self.rebuild) {
            Ok(Rebuilt::Unchanged(_)) => (Outcome::Unchanged, None),
            Ok(Rebuilt::Built { snapshot, diagnostics, fallback_from }) => {
                if !diagnostics.is_empty() {
                    tracing::warn!(count = diagnostics.len(), "ingestion diagnostics");
                }
                if let Some(err) = fallback_from {
                    tracing::warn!(error = %err, provider = ?snapshot.clusters().map(|c| &c.provider), "published with fallback embeddings");
                }
                match self.cell.publish(snapshot) {
                    Ok(()) => (Outcome::Published, None),
                    Err(e) => (Outcome::Failed, Some(e.to_string())),
                }
            }
            Err(e) => (Outcome::Failed, Some(e.to_string())),
        }
    }

    /// Spawns the scheduler: an immediate refresh, then one per `interval`.
    /// Ticks that land while a refresh is running are logged as overruns.
    pub fn spawn(self: Arc<Self>, interval: Duration) -> JoinHandle<()> {
        tokio::spawn(async move {
            let mut ticker = tokio::time::interval(interval);
            ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
            loop {
                ticker.tick().await;
                let pipeline = self.clone();
                tokio::task::spawn_blocking(move || pipeline.refresh_once());
            }
        })
    }

    /// One refresh on the blocking pool, awaited.
    pub async fn refresh(self: &Arc<Self>) -> TickRecord {
        let pipeline = self.clone();
        tokio::task::spawn_blocking(move || pipeline.refresh_once())
            .await
            .expect("refresh task panicked")
    }
}
