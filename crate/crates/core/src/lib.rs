//! Dataset-metadata catalogue: typed records, the filtration query language,
//! and embedding-based clustering for the cluster graph.

pub mod cluster;
pub mod embed;
pub mod error;
pub mod ingest;
pub mod kmeans;
pub mod matrix;
pub mod pca;
pub mod query;
pub mod record;
pub mod schema;
pub mod snapshot;

pub use cluster::{build_cluster_model, ClusterError, ClusterModel};
pub use embed::{EmbeddingProvider, LocalProvider, ProviderError};
pub use error::CatalogError;
pub use ingest::{ingest, Diagnostic, DiagnosticKind, Ingested, SourceFormat};
pub use kmeans::KMeansParams;
pub use matrix::Matrix;
pub use query::{filter_records, FilterExpr, QueryError};
pub use record::{DatasetRecord, RecordFields};
pub use schema::{Feature, FeatureKind, Schema, Value};
pub use snapshot::{project_features, CatalogSnapshot, FeatureCount, TagValue};

/// Pretty JSON (two-space indent) with a trailing newline. Every payload
/// served over HTTP or printed by the CLI goes through here, so the two are
/// byte-identical.
pub fn to_json_payload<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("payload types always serialize");
    out.push('\n');
    out
}
