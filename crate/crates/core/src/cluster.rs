//! Cluster model for the embedding graph: text -> embedding -> K-Means -> 2-D.

use serde::Serialize;
use thiserror::Error;

use crate::embed::{record_text, EmbeddingProvider, ProviderError};
use crate::kmeans::{kmeans, KMeansParams};
use crate::matrix::Matrix;
use crate::pca::project_2d;
use crate::record::DatasetRecord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("invalid cluster count k={k} for {n} vectors")]
    InvalidK { k: usize, n: usize },
    #[error("vector {row} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("no records to cluster")]
    Empty,
    #[error(transparent)]
    ProviderFailure(#[from] ProviderError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterModel {
    pub dim: usize,
    pub embeddings: Matrix,
    pub assignments: Vec<usize>,
    pub centroids: Matrix,
    pub coords2d: Matrix,
    /// Effective cluster count (requested k clamped to the record count).
    pub k: usize,
    pub seed: u64,
    pub distortion: f64,
    /// Name of the provider that produced the embeddings.
    pub provider: String,
}

impl ClusterModel {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// Embeds each record's Name/Description/Abstract text with `provider` and
/// clusters the result. A requested `k` larger than the record count is
/// clamped to it.
pub fn build_cluster_model(
    records: &[DatasetRecord],
    provider: &dyn EmbeddingProvider,
    params: &KMeansParams,
) -> Result<ClusterModel, ClusterError> {
    if records.is_empty() {
        return Err(ClusterError::Empty);
    }
    let texts: Vec<String> = records.iter().map(record_text).collect();
    let vectors = provider.embed_batch(&texts)?;
    if vectors.len() != texts.len() {
        return Err(ProviderError::BadResponse(format!(
            "{} vectors for {} texts",
            vectors.len(),
            texts.len()
        ))
        .into());
    }
    let expected = provider.dim();
    if let Some((row, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != expected) {
        return Err(ClusterError::DimensionMismatch {
            row,
            expected,
            found: v.len(),
        });
    }
    let embeddings = Matrix::from_rows(&vectors).expect("dimensions checked above");
    cluster_embeddings(embeddings, provider.name(), params)
}

/// Clusters precomputed embeddings (one row per record).
pub fn cluster_embeddings(
    embeddings: Matrix,
    provider: &str,
    params: &KMeansParams,
) -> Result<ClusterModel, ClusterError> {
    let n = embeddings.rows();
    if n == 0 {
        return Err(ClusterError::Empty);
    }
    let params = KMeansParams {
        k: params.k.min(n),
        ..*params
    };
    let fit = kmeans(&embeddings, &params)?;
    let coords2d = project_2d(&embeddings);
    Ok(ClusterModel {
        dim: embeddings.cols(),
        assignments: fit.assignments,
        centroids: fit.centroids,
        coords2d,
        k: params.k,
        seed: params.seed,
        distortion: fit.distortion,
        provider: provider.to_string(),
        embeddings,
    })
}
