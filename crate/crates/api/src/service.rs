//! Wires configuration, refresh pipeline, report store and router together.

use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use axum::http::{header, HeaderName, HeaderValue, Method};
use axum::Router;
use catalogue_core::{CatalogError, Schema};
use catalogue_refresh::{Pipeline, Providers, RebuildConfig, SnapshotCell, TickLog};
use thiserror::Error;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::config::{ConfigError, ServiceConfig};
use crate::reports::ReportStore;
use crate::routes::{router, AppState};
use crate::VERSION_HEADER;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot load schema: {0}")]
    Schema(#[from] CatalogError),
    #[error("cannot open {what}: {source}")]
    Io {
        what: &'static str,
        source: std::io::Error,
    },
}

pub struct Service {
    config: ServiceConfig,
    state: AppState,
    pipeline: Arc<Pipeline>,
}

impl Service {
    pub fn from_config(config: ServiceConfig) -> Result<Self, ServiceError> {
        let providers = Providers::from_config(&config.provider, config.clustering.dim, config.clustering.seed);
        Self::with_providers(config, providers)
    }

    /// Like [`Service::from_config`] with explicit embedding providers.
    pub fn with_providers(config: ServiceConfig, providers: Providers) -> Result<Self, ServiceError> {
        config.validate()?;
        let schema = Arc::new(Schema::load(&config.schema_path)?);
        for feature in &config.stats_features {
            if schema.position(feature).is_none() {
                tracing::warn!(feature = %feature, "stats feature not in schema; it will be skipped");
            }
        }
        let reports = ReportStore::open(&config.report_log, config.webhook.clone())
            .map_err(|source| ServiceError::Io { what: "report log", source })?;
        let log = match &config.tick_log {
            Some(path) => TickLog::to_file(path).map_err(|source| ServiceError::Io { what: "tick log", source })?,
            None => TickLog::default(),
        };
        let cell = Arc::new(SnapshotCell::new());
        let rebuild = RebuildConfig {
            format: config.source.format(),
            checksum_skip: config.source.checksum_skip,
            kmeans: config.clustering.kmeans(),
        };
        let pipeline = Pipeline::new(config.source.clone(), schema, providers, rebuild, cell.clone()).with_log(log);
        let state = AppState {
            cell,
            reports: Arc::new(reports),
            stats_features: Arc::new(config.stats_features.clone()),
        };
        Ok(Self {
            config,
            state,
            pipeline: Arc::new(pipeline),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn state(&self) -> &AppState {
        &self.state
    }

    pub fn pipeline(&self) -> &Arc<Pipeline> {
        &self.pipeline
    }

    pub fn router(&self) -> Router {
        let app = router(self.state.clone());
        match &self.config.cors_origin {
            Some(origin) => app.layer(cors(origin)),
            None => app,
        }
    }

    /// Starts the refresh scheduler (first refresh immediately) and serves
    /// until `shutdown` resolves. Endpoints answer 503 until the first
    /// snapshot is published.
    pub async fn serve(
        self,
        listener: TcpListener,
        shutdown: impl Future<Output = ()> + Send + 'static,
    ) -> std::io::Result<()> {
        let interval = Duration::from_secs(self.config.source.refresh_interval_seconds);
        let scheduler = self.pipeline.clone().spawn(interval);
        let result = axum::serve(listener, self.router())
            .with_graceful_shutdown(shutdown)
            .await;
        scheduler.abort();
        result
    }
}

fn cors(origin: &str) -> CorsLayer {
    let allow = if origin == "*" {
        AllowOrigin::any()
    } else {
        match HeaderValue::from_str(origin) {
            Ok(value) => AllowOrigin::exact(value),
            Err(_) => {
                tracing::warn!(origin, "invalid CORS origin; cross-origin requests disabled");
                AllowOrigin::list([])
            }
        }
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
        .expose_headers([HeaderName::from_static(VERSION_HEADER)])
}
