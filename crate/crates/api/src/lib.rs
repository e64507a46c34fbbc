//! HTTP API over the live catalogue snapshot.
//!
//! Every handler loads the snapshot once and computes its whole response
//! from it; the snapshot version is returned in the `x-catalogue-version`
//! header.

pub mod config;
pub mod error;
pub mod reports;
pub mod routes;
pub mod service;

pub use config::{ClusteringConfig, ConfigError, ServiceConfig, WebhookConfig};
pub use error::{ApiError, ErrorBody};
pub use reports::{ForwardStatus, IssueReport, ReportStore};
pub use routes::{cluster_points, router, select_datasets, stats_payload, AppState, ClusterPoint};
pub use service::{Service, ServiceError};

pub const VERSION_HEADER: &str = "x-catalogue-version";
