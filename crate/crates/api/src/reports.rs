//! Issue reports: validation, the append-only log and webhook forwarding.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::http::StatusCode;
use catalogue_core::{CatalogSnapshot, Value};
use serde::{Deserialize, Serialize};

use crate::config::WebhookConfig;
use crate::error::ApiError;

pub const MAX_MESSAGE_CHARS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardStatus {
    Pending,
    Forwarded,
    Failed,
    /// No webhook configured.
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueReport {
    pub id: String,
    pub dataset_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reporter: Option<String>,
    pub created_at: i64,
    pub forward_status: ForwardStatus,
}

/// Body of `POST /reports`.
#[derive(Debug, Clone, Deserialize)]
pub struct ReportRequest {
    pub dataset_index: i64,
    #[serde(default)]
    pub field: Option<String>,
    pub message: String,
    #[serde(default)]
    pub reporter: Option<String>,
}

/// One line of the report log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogLine {
    Report(IssueReport),
    Status {
        id: String,
        forward_status: ForwardStatus,
        attempts: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
        at: i64,
    },
}

/// Append-only JSON-lines store. Lines are written under one lock, so
/// concurrent submissions never interleave; existing lines are never
/// touched.
#[derive(Debug)]
pub struct ReportStore {
    path: PathBuf,
    file: Mutex<File>,
    statuses: Mutex<HashMap<String, ForwardStatus>>,
    webhook: Option<WebhookConfig>,
}

impl ReportStore {
    /// Opens (or creates) the log and replays it to recover statuses.
    pub fn open(path: impl AsRef<Path>, webhook: Option<WebhookConfig>) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).read(true).open(&path)?;
        let mut statuses = HashMap::new();
        for line in BufReader::new(File::open(&path)?).lines() {
            match serde_json::from_str::<LogLine>(&line?) {
                Ok(LogLine::Report(r)) => {
                    statuses.insert(r.id, r.forward_status);
                }
                Ok(LogLine::Status { id, forward_status, .. }) => {
                    statuses.insert(id, forward_status);
                }
                Err(e) => tracing::warn!(error = %e, "skipping unreadable report log line"),
            }
        }
        Ok(Self {
            path,
            file: Mutex::new(file),
            statuses: Mutex::new(statuses),
            webhook,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn status(&self, id: &str) -> Option<ForwardStatus> {
        self.statuses.lock().unwrap_or_else(|e| e.into_inner()).get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.statuses.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn append(&self, line: &LogLine) -> std::io::Result<()> {
        let mut text = serde_json::to_string(line).expect("log line serializes");
        text.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(text.as_bytes())?;
        file.sync_data()?;
        let (id, status) = match line {
            LogLine::Report(r) => (&r.id, r.forward_status),
            LogLine::Status { id, forward_status, .. } => (id, *forward_status),
        };
        self.statuses
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id.clone(), status);
        Ok(())
    }

    /// Validates and stores a report, then starts forwarding it in the
    /// background when a webhook is configured. Must run inside a Tokio
    /// runtime.
    pub fn submit(
        self: &Arc<Self>,
        request: ReportRequest,
        snapshot: &CatalogSnapshot,
    ) -> Result<IssueReport, ApiError> {
        let message = request.message.trim();
        if message.is_empty() {
            return Err(ApiError::bad_request("ValidationError", "message must not be empty"));
        }
        if message.chars().count() > MAX_MESSAGE_CHARS {
            return Err(ApiError::bad_request(
                "ValidationError",
                format!("message exceeds {MAX_MESSAGE_CHARS} characters"),
            ));
        }
        let field = request.field.filter(|f| !f.trim().is_empty());
        if let Some(field) = &field {
            if snapshot.schema().position(field).is_none() {
                return Err(ApiError::bad_request(
                    "ValidationError",
                    format!("unknown field {field:?}"),
                ));
            }
        }
        let record = snapshot.get_record(request.dataset_index)?;
        let report = IssueReport {
            id: uuid::Uuid::new_v4().to_string(),
            dataset_index: record.index,
            field,
            message: message.to_string(),
            reporter: request.reporter.map(|r| r.trim().to_string()).filter(|r| !r.is_empty()),
            created_at: catalogue_refresh::rebuild::now_seconds(),
            forward_status: if self.webhook.is_some() {
                ForwardStatus::Pending
            } else {
                ForwardStatus::Disabled
            },
        };
        self.append(&LogLine::Report(report.clone())).map_err(|e| {
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "ReportLogUnavailable", e.to_string())
        })?;
        if let Some(webhook) = self.webhook.clone() {
            let name = match record.value("Name") {
                Value::Text(name) => Some(name.clone()),
                _ => None,
            };
            tokio::spawn(forward(self.clone(), webhook, report.clone(), name));
        }
        Ok(report)
    }
}

#[derive(Serialize)]
struct WebhookPayload<'a> {
    title: String,
    dataset_name: Option<&'a str>,
    report: &'a IssueReport,
}

async fn forward(store: Arc<ReportStore>, webhook: WebhookConfig, report: IssueReport, name: Option<String>) {
    let payload = WebhookPayload {
        title: format!(
            "Data card issue: {} (#{})",
            name.as_deref().unwrap_or("unnamed dataset"),
            report.dataset_index
        ),
        dataset_name: name.as_deref(),
        report: &report,
    };
    let body = serde_json::to_value(&payload).expect("payload serializes");
    let mut delay = Duration::from_millis(webhook.backoff_ms);
    let mut attempts = 0;
    let result = loop {
        attempts += 1;
        let (cfg, body) = (webhook.clone(), body.clone());
        let outcome = tokio::task::spawn_blocking(move || post(&cfg, &body))
            .await
            .unwrap_or_else(|e| Err(e.to_string()));
        match outcome {
            Ok(()) => break Ok(()),
            Err(e) if attempts > webhook.retries => break Err(e),
            Err(e) => {
                tracing::warn!(id = %report.id, attempts, error = %e, "webhook delivery failed, retrying");
                tokio::time::sleep(delay).await;
                delay *= 2;
            }
        }
    };
    let (forward_status, error) = match result {
        Ok(()) => (ForwardStatus::Forwarded, None),
        Err(e) => (ForwardStatus::Failed, Some(e)),
    };
    let line = LogLine::Status {
        id: report.id.clone(),
        forward_status,
        attempts,
        error,
        at: catalogue_refresh::rebuild::now_seconds(),
    };
    if let Err(e) = store.append(&line) {
        tracing::error!(id = %report.id, error = %e, "cannot record forward status");
    }
}

fn post(cfg: &WebhookConfig, body: &serde_json::Value) -> Result<(), String> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(cfg.timeout_seconds)))
        .http_status_as_error(false)
        .build()
        .into();
    let mut request = agent.post(&cfg.url);
    if let Some(token) = &cfg.token {
        request = request.header("Authorization", &format!("Bearer {token}"));
    }
    let response = request.send_json(body).map_err(|e| e.to_string())?;
    let status = response.status();
    if status.is_success() {
        Ok(())
    } else {
        Err(format!("HTTP {}", status.as_u16()))
    }
}
