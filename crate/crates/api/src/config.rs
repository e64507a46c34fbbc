//! Service configuration file.

use std::path::{Path, PathBuf};

use catalogue_core::embed::DEFAULT_DIM;
use catalogue_core::kmeans::{DEFAULT_K, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use catalogue_core::KMeansParams;
use catalogue_refresh::{ProviderConfig, SourceConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PORT: u16 = 8080;

/// Features charted by `/datasets/stats` unless configured otherwise.
pub const DEFAULT_STATS_FEATURES: [&str; 11] = [
    "Host",
    "Year",
    "Access",
    "Tasks",
    "Domain",
    "License",
    "Dialect",
    "Form",
    "Venue",
    "Ethical Risks",
    "Script",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn default_port() -> u16 {
    DEFAULT_PORT
}

fn default_stats() -> Vec<String> {
    DEFAULT_STATS_FEATURES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    pub k: usize,
    pub seed: u64,
    /// Dimension of the local embedding provider.
    pub dim: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            seed: 0,
            dim: DEFAULT_DIM,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
        }
    }
}

impl ClusteringConfig {
    pub fn kmeans(&self) -> KMeansParams {
        KMeansParams {
            k: self.k,
            seed: self.seed,
            max_iters: self.max_iters,
            tol: self.tol,
        }
    }
}

fn default_webhook_retries() -> u32 {
    3
}

fn default_webhook_backoff() -> u64 {
    500
}

fn default_webhook_timeout() -> u64 {
    10
}

/// Issue-tracker endpoint that receives each report as a JSON POST.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WebhookConfig {
    pub url: String,
    #[serde(default)]
    pub token: Option<String>,
    #[serde(default = "default_webhook_retries")]
    pub retries: u32,
    #[serde(default = "default_webhook_backoff")]
    pub backoff_ms: u64,
    #[serde(default = "default_webhook_timeout")]
    pub timeout_seconds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    #[serde(default = "default_port")]
    pub port: u16,
    pub source: SourceConfig,
    pub schema_path: PathBuf,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(default)]
    pub provider: ProviderConfig,
    #[serde(default = "default_stats")]
    pub stats_features: Vec<String>,
    pub report_log: PathBuf,
    /// JSON-lines refresh log; ticks go to the tracing output regardless.
    #[serde(default)]
    pub tick_log: Option<PathBuf>,
    #[serde(default)]
    pub webhook: Option<WebhookConfig>,
    /// Allowed browser origin, or `*`.
    #[serde(default)]
    pub cors_origin: Option<String>,
}

impl ServiceConfig {
    /// Reads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: ServiceConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.to_path_buf(),
                source,
            })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.schema_path);
        join(&mut self.report_log);
        if let Some(log) = &mut self.tick_log {
            join(log);
        }
        if !self.source.is_remote() && Path::new(&self.source.location).is_relative() {
            self.source.location = base.join(&self.source.location).to_string_lossy().into_owned();
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.source.validate().map_err(ConfigError::Invalid)?;
        if self.clustering.k < 1 {
            return Err(ConfigError::Invalid("clustering.k must be at least 1".into()));
        }
        if self.clustering.dim < 2 {
            return Err(ConfigError::Invalid("clustering.dim must be at least 2".into()));
        }
        if !(self.clustering.tol >= 0.0) {
            return Err(ConfigError::Invalid("clustering.tol must be non-negative".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults_and_resolved_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("service.json");
        std::fs::write(
            &path,
            r#"{"source": {"location": "catalogue.csv"}, "schema_path": "schema.json", "report_log": "/var/tmp/reports.jsonl"}"#,
        )
        .unwrap();
        let cfg = ServiceConfig::load(&path).unwrap();
        assert_eq!(cfg.port, 8080);
        assert_eq!(cfg.clustering, ClusteringConfig::default());
        assert_eq!(cfg.provider, ProviderConfig::Local);
        assert_eq!(cfg.stats_features.len(), 11);
        assert_eq!(cfg.schema_path, dir.path().join("schema.json"));
        assert_eq!(cfg.report_log, PathBuf::from("/var/tmp/reports.jsonl"));
        assert_eq!(Path::new(&cfg.source.location), dir.path().join("catalogue.csv"));
    }

    #[test]
    fn rejects_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("service.json");
        std::fs::write(
            &path,
            r#"{"source": {"location": "c.csv", "refresh_interval_seconds": 0}, "schema_path": "s.json", "report_log": "r.jsonl"}"#,
        )
        .unwrap();
        assert!(matches!(ServiceConfig::load(&path), Err(ConfigError::Invalid(_))));
        assert!(matches!(
            ServiceConfig::load(dir.path().join("missing.json")),
            Err(ConfigError::Read { .. })
        ));
        std::fs::write(&path, "{").unwrap();
        assert!(matches!(ServiceConfig::load(&path), Err(ConfigError::Parse { .. })));
    }
}
