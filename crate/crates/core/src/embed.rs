//! Record text extraction and embedding providers.

use thiserror::Error;

use crate::record::DatasetRecord;
use crate::schema::Value;

/// Features whose text is embedded, in concatenation order.
pub const TEXT_FEATURES: [&str; 3] = ["Name", "Description", "Abstract"];

pub const DEFAULT_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("embedding provider unavailable: {0}")]
    Unavailable(String),
    #[error("embedding provider returned a bad response: {0}")]
    BadResponse(String),
}

/// Turns texts into fixed-dimension vectors. The same text must always map
/// to the same vector for a given provider configuration.
pub trait EmbeddingProvider: Send + Sync {
    /// Short identifier recorded in the cluster model's provenance.
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// Name, Description and Abstract joined by single spaces; missing or empty
/// parts are skipped.
pub fn record_text(record: &DatasetRecord) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(TEXT_FEATURES.len());
    for feature in TEXT_FEATURES {
        let part = match record.value(feature) {
            Value::Text(s) => s.clone(),
            Value::Integer(n) => n.to_string(),
            Value::TextList(items) => items.join(" "),
            Value::Missing => continue,
        };
        if !part.is_empty() {
            parts.push(part);
        }
    }
    parts.join(" ")
}

/// Lowercased tokens split on anything that is not alphanumeric.
pub fn text_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over `seed` (little endian) then the token bytes, followed by the
/// splitmix64 finalizer. Stable across platforms and releases.
pub fn token_hash(token: &str, seed: u64) -> u64 {
    let mut h = FNV_OFFSET;
    for byte in seed.to_le_bytes().iter().chain(token.as_bytes()) {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Signed feature hashing: each token adds ±1 at `hash % dim` (sign from the
/// top hash bit), then the vector is L2-normalized. Empty text gives the zero
/// vector.
pub fn local_embed(text: &str, dim: usize, seed: u64) -> Vec<f64> {
    assert!(dim >= 2, "embedding dimension must be at least 2, got {dim}");
    let mut v = vec![0.0; dim];
    for token in text_tokens(text) {
        let h = token_hash(&token, seed);
        let slot = (h % dim as u64) as usize;
        v[slot] += if h >> 63 == 1 { -1.0 } else { 1.0 };
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Deterministic offline provider backed by [`local_embed`].
#[derive(Debug, Clone)]
pub struct LocalProvider {
    dim: usize,
    seed: u64,
}

impl LocalProvider {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 2, "embedding dimension must be at least 2, got {dim}");
        Self { dim, seed }
    }
}

impl Default for LocalProvider {
    fn default() -> Self {
        Self::new(DEFAULT_DIM, 0)
    }
}

impl EmbeddingProvider for LocalProvider {
    fn name(&self) -> &str {
        "local"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| local_embed(t, self.dim, self.seed)).collect())
    }
}
