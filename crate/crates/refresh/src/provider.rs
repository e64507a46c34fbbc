//! Embedding provider configuration, the HTTP provider and a call counter.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use catalogue_core::embed::DEFAULT_DIM;
use catalogue_core::{EmbeddingProvider, LocalProvider, ProviderError};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TIMEOUT_SECONDS: u64 = 30;
pub const DEFAULT_RETRIES: u32 = 3;
pub const DEFAULT_BACKOFF_MS: u64 = 250;

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_SECONDS
}

fn default_retries() -> u32 {
    DEFAULT_RETRIES
}

fn default_backoff() -> u64 {
    DEFAULT_BACKOFF_MS
}

fn default_dim() -> usize {
    DEFAULT_DIM
}

/// What a rebuild does when the primary provider fails.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// Embed with the local provider instead.
    #[default]
    Local,
    /// Reuse the previous snapshot's vectors for texts it already embedded.
    Previous,
    /// Fail the rebuild.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProviderConfig {
    Local,
    Remote {
        url: String,
        #[serde(default)]
        token: Option<String>,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_timeout")]
        timeout_seconds: u64,
        #[serde(default = "default_retries")]
        retries: u32,
        #[serde(default = "default_backoff")]
        backoff_ms: u64,
        #[serde(default)]
        fallback: Fallback,
    },
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::Local
    }
}

/// The providers a rebuild may use.
#[derive(Clone)]
pub struct Providers {
    pub primary: Arc<dyn EmbeddingProvider>,
    pub fallback: Fallback,
    /// Used for [`Fallback::Local`].
    pub local: Arc<dyn EmbeddingProvider>,
}

impl Providers {
    pub fn local(dim: usize, seed: u64) -> Self {
        let local: Arc<dyn EmbeddingProvider> = Arc::new(LocalProvider::new(dim, seed));
        Self {
            primary: local.clone(),
            fallback: Fallback::None,
            local,
        }
    }

    /// `local_dim`/`seed` configure the local provider used directly or as
    /// the fallback.
    pub fn from_config(cfg: &ProviderConfig, local_dim: usize, seed: u64) -> Self {
        match cfg {
            ProviderConfig::Local => Self::local(local_dim, seed),
            ProviderConfig::Remote {
                url,
                token,
                dim,
                timeout_seconds,
                retries,
                backoff_ms,
                fallback,
            } => Self {
                primary: Arc::new(
                    RemoteProvider::new(url.clone(), *dim)
                        .token(token.clone())
                        .timeout(Duration::from_secs(*timeout_seconds))
                        .retries(*retries, Duration::from_millis(*backoff_ms)),
                ),
                fallback: *fallback,
                local: Arc::new(LocalProvider::new(local_dim, seed)),
            },
        }
    }
}

/// Calls an HTTP inference endpoint: POST a JSON array of strings, receive a
/// JSON array of float arrays in the same order.
#[derive(Debug, Clone)]
pub struct RemoteProvider {
    url: String,
    token: Option<String>,
    dim: usize,
    timeout: Duration,
    retries: u32,
    backoff: Duration,
}

impl RemoteProvider {
    pub fn new(url: impl Into<String>, dim: usize) -> Self {
        Self {
            url: url.into(),
            token: None,
            dim,
            timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECONDS),
            retries: DEFAULT_RETRIES,
            backoff: Duration::from_millis(DEFAULT_BACKOFF_MS),
        }
    }

    pub fn token(mut self, token: Option<String>) -> Self {
        self.token = token;
        self
    }

    pub fn timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Extra attempts after the first, waiting `backoff`, `2 * backoff`, ...
    pub fn retries(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    fn attempt(&self, agent: &ureq::Agent, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let mut request = agent.post(&self.url);
        if let Some(token) = &self.token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .send_json(texts)
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        let status = response.status().as_u16();
        if status >= 500 || status == 429 {
            return Err(ProviderError::Unavailable(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(ProviderError::BadResponse(format!("HTTP {status}")));
        }
        let vectors: Vec<Vec<f64>> = response
            .body_mut()
            .with_config()
            .limit(u64::MAX)
            .read_json()
            .map_err(|e| ProviderError::BadResponse(e.to_string()))?;
        if vectors.len() != texts.len() {
            return Err(ProviderError::BadResponse(format!(
                "{} vectors for {} texts",
                vectors.len(),
                texts.len()
            )));
        }
        Ok(vectors)
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn name(&self) -> &str {
        "remote"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    /// Blocking; retries only on transport errors, 5xx and 429.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut delay = self.backoff;
        let mut attempt = 0;
        loop {
            match self.attempt(&agent, texts) {
                Err(ProviderError::Unavailable(msg)) if attempt < self.retries => {
                    tracing::warn!(attempt, error = %msg, "embedding request failed, retrying");
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

/// Wraps a provider and counts `embed_batch` calls.
pub struct CountingProvider<P> {
    inner: P,
    calls: AtomicU64,
}

impl<P: EmbeddingProvider> CountingProvider<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for CountingProvider<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.embed_batch(texts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remote_config_defaults() {
        let cfg: ProviderConfig =
            serde_json::from_str(r#"{"kind": "remote", "url": "http://127.0.0.1:9/embed"}"#).unwrap();
        let ProviderConfig::Remote { timeout_seconds, retries, fallback, dim, .. } = cfg else {
            panic!("expected remote");
        };
        assert_eq!((timeout_seconds, retries, dim), (30, 3, 256));
        assert_eq!(fallback, Fallback::Local);
    }

    #[test]
    fn unreachable_remote_is_unavailable() {
        let provider = RemoteProvider::new("http://127.0.0.1:9/embed", 4)
            .timeout(Duration::from_secs(2))
            .retries(2, Duration::from_millis(1));
        let err = provider.embed_batch(&["x".to_string()]).unwrap_err();
        assert!(matches!(err, ProviderError::Unavailable(_)), "{err:?}");
    }

    #[test]
    fn counter_counts_batches() {
        let provider = CountingProvider::new(LocalProvider::new(8, 0));
        provider.embed_batch(&["a".into(), "b".into()]).unwrap();
        provider.embed_batch(&[]).unwrap();
        assert_eq!(provider.calls(), 2);
    }
}
