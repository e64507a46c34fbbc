//! Raw source bytes to a fully indexed, clustered snapshot.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use catalogue_core::cluster::cluster_embeddings;
use catalogue_core::embed::record_text;
use catalogue_core::{
    build_cluster_model, ingest, CatalogError, CatalogSnapshot, ClusterError, ClusterModel,
    DatasetRecord, Diagnostic, KMeansParams, Matrix, Schema, SourceFormat,
};
use thiserror::Error;

use crate::provider::{Fallback, Providers};
use crate::source::Fetched;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildFailure {
    #[error("ingestion failed: {0}")]
    Ingest(#[from] CatalogError),
    #[error("clustering failed: {0}")]
    Cluster(ClusterError),
}

#[derive(Debug, Clone)]
pub struct RebuildConfig {
    pub format: SourceFormat,
    pub checksum_skip: bool,
    pub kmeans: KMeansParams,
}

#[derive(Debug, Clone)]
pub enum Rebuilt {
    /// Checksum matched the previous snapshot, which is returned as is.
    Unchanged(Arc<CatalogSnapshot>),
    Built {
        snapshot: Arc<CatalogSnapshot>,
        diagnostics: Vec<Diagnostic>,
        /// Primary provider error when a fallback produced the embeddings.
        fallback_from: Option<ClusterError>,
    },
}

impl Rebuilt {
    pub fn snapshot(&self) -> &Arc<CatalogSnapshot> {
        match self {
            Rebuilt::Unchanged(s) => s,
            Rebuilt::Built { snapshot, .. } => snapshot,
        }
    }
}

pub fn now_seconds() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs() as i64)
}

/// Builds the next snapshot from `fetched`. Version is `prev.version + 1`,
/// or 1 without a previous snapshot.
pub fn rebuild(
    fetched: &Fetched,
    prev: Option<&Arc<CatalogSnapshot>>,
    schema: &Arc<Schema>,
    providers: &Providers,
    cfg: &RebuildConfig,
) -> Result<Rebuilt, BuildFailure> {
    if let Some(prev) = prev {
        if cfg.checksum_skip && prev.checksum() == Some(fetched.checksum.as_str()) {
            return Ok(Rebuilt::Unchanged(prev.clone()));
        }
    }
    let ingested = ingest(&fetched.bytes, cfg.format, schema)?;
    let (clusters, fallback_from) = if ingested.records.is_empty() {
        (None, None)
    } else {
        let (model, err) = cluster(&ingested.records, prev.map(Arc::as_ref), providers, &cfg.kmeans)?;
        (Some(model), err)
    };
    let version = prev.map_or(1, |p| p.version() + 1);
    let snapshot = CatalogSnapshot::new(
        version,
        schema.clone(),
        ingested.records,
        clusters,
        now_seconds(),
    )
    .with_checksum(fetched.checksum.clone());
    Ok(Rebuilt::Built {
        snapshot: Arc::new(snapshot),
        diagnostics: ingested.diagnostics,
        fallback_from,
    })
}

fn cluster(
    records: &[DatasetRecord],
    prev: Option<&CatalogSnapshot>,
    providers: &Providers,
    params: &KMeansParams,
) -> Result<(ClusterModel, Option<ClusterError>), BuildFailure> {
    let err = match build_cluster_model(records, providers.primary.as_ref(), params) {
        Ok(model) => return Ok((model, None)),
        Err(err @ (ClusterError::ProviderFailure(_) | ClusterError::DimensionMismatch { .. })) => err,
        Err(other) => return Err(BuildFailure::Cluster(other)),
    };
    tracing::warn!(error = %err, fallback = ?providers.fallback, "primary embedding provider failed");
    let model = match providers.fallback {
        Fallback::None => return Err(BuildFailure::Cluster(err)),
        Fallback::Local => build_cluster_model(records, providers.local.as_ref(), params),
        Fallback::Previous => match prev.and_then(|p| previous_embeddings(records, p)) {
            Some((embeddings, provider)) => cluster_embeddings(embeddings, &provider, params),
            None => return Err(BuildFailure::Cluster(err)),
        },
    };
    model.map(|m| (m, Some(err))).map_err(BuildFailure::Cluster)
}

/// Looks up every record's text among the previous snapshot's embedded
/// texts. `None` unless all are found.
fn previous_embeddings(records: &[DatasetRecord], prev: &CatalogSnapshot) -> Option<(Matrix, String)> {
    let model = prev.clusters()?;
    let known: HashMap<String, usize> = prev
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| (record_text(r), i))
        .collect();
    let rows: Vec<Vec<f64>> = records
        .iter()
        .map(|r| known.get(&record_text(r)).map(|&i| model.embeddings.row(i).to_vec()))
        .collect::<Option<_>>()?;
    let provider = format!("{} (previous)", model.provider);
    Matrix::from_rows(&rows).ok().map(|m| (m, provider))
}
