//! Metadata source location and fetching.

use std::fmt::Write as _;
use std::time::Duration;

use catalogue_core::SourceFormat;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_REFRESH_INTERVAL_SECONDS: u64 = 600;
const FETCH_TIMEOUT: Duration = Duration::from_secs(30);

fn default_interval() -> u64 {
    DEFAULT_REFRESH_INTERVAL_SECONDS
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Local file path or `http(s)://` URL.
    pub location: String,
    /// Guessed from the location suffix when absent.
    #[serde(default)]
    pub format: Option<SourceFormat>,
    #[serde(default = "default_interval")]
    pub refresh_interval_seconds: u64,
    #[serde(default = "default_true")]
    pub checksum_skip: bool,
}

impl SourceConfig {
    pub fn new(location: impl Into<String>) -> Self {
        Self {
            location: location.into(),
            format: None,
            refresh_interval_seconds: DEFAULT_REFRESH_INTERVAL_SECONDS,
            checksum_skip: true,
        }
    }

    pub fn format(&self) -> SourceFormat {
        self.format
            .unwrap_or_else(|| SourceFormat::from_location(&self.location))
    }

    pub fn is_remote(&self) -> bool {
        self.location.starts_with("http://") || self.location.starts_with("https://")
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.location.trim().is_empty() {
            return Err("source.location is empty".into());
        }
        if self.refresh_interval_seconds < 1 {
            return Err("source.refresh_interval_seconds must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FetchFailure {
    #[error("cannot read {location}: {message}")]
    Io { location: String, message: String },
    #[error("{location} answered HTTP {status}")]
    Status { location: String, status: u16 },
    #[error("request to {location} failed: {message}")]
    Network { location: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub bytes: Vec<u8>,
    /// Lowercase hex SHA-256 of `bytes`.
    pub checksum: String,
}

impl Fetched {
    pub fn new(bytes: Vec<u8>) -> Self {
        let checksum = checksum(&bytes);
        Self { bytes, checksum }
    }
}

pub fn checksum(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Reads the whole source. Blocking; call from a blocking context.
pub fn fetch_source(cfg: &SourceConfig) -> Result<Fetched, FetchFailure> {
    let location = cfg.location.clone();
    if !cfg.is_remote() {
        return std::fs::read(&cfg.location)
            .map(Fetched::new)
            .map_err(|e| FetchFailure::Io {
                location,
                message: e.to_string(),
            });
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(FETCH_TIMEOUT))
        .http_status_as_error(false)
        .build()
        .into();
    let network = |e: ureq::Error| FetchFailure::Network {
        location: location.clone(),
        message: e.to_string(),
    };
    let mut response = agent.get(&cfg.location).call().map_err(network)?;
    let status = response.status().as_u16();
    if !(200..300).contains(&status) {
        return Err(FetchFailure::Status { location, status });
    }
    let bytes = response
        .body_mut()
        .with_config()
        .limit(u64::MAX)
        .read_to_vec()
        .map_err(network)?;
    Ok(Fetched::new(bytes))
}
