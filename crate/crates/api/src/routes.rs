//! Read endpoints and report submission.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use catalogue_core::{
    filter_records, project_features, to_json_payload, CatalogSnapshot, FeatureCount, RecordFields,
    Value,
};
use catalogue_refresh::SnapshotCell;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::reports::{ReportRequest, ReportStore};
use crate::VERSION_HEADER;

#[derive(Clone)]
pub struct AppState {
    pub cell: Arc<SnapshotCell>,
    pub reports: Arc<ReportStore>,
    pub stats_features: Arc<Vec<String>>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/datasets", get(datasets))
        .route("/datasets/schema", get(schema))
        .route("/datasets/tags", get(tags))
        .route("/datasets/stats", get(stats))
        .route("/datasets/clusters", get(clusters))
        .route("/datasets/{index}", get(dataset))
        .route("/reports", post(submit_report))
        .with_state(state)
}

/// Splits a comma-separated feature list; blank items are dropped.
pub fn parse_feature_list(raw: Option<&str>) -> Vec<String> {
    raw.map(|s| {
        s.split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .map(str::to_string)
            .collect()
    })
    .unwrap_or_default()
}

/// Filter then project: the `/datasets` payload, shared with the CLI.
pub fn select_datasets(
    snapshot: &CatalogSnapshot,
    query: Option<&str>,
    features: Option<&str>,
) -> Result<Vec<RecordFields>, ApiError> {
    let matched = filter_records(snapshot, query.unwrap_or(""))?;
    let features = parse_feature_list(features);
    Ok(project_features(snapshot.schema(), matched, &features)?)
}

fn load(state: &AppState) -> Result<Arc<CatalogSnapshot>, ApiError> {
    state.cell.load().ok_or_else(ApiError::not_ready)
}

fn json<T: Serialize + ?Sized>(snapshot: &CatalogSnapshot, status: StatusCode, body: &T) -> Response {
    let mut response = (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        to_json_payload(body),
    )
        .into_response();
    response
        .headers_mut()
        .insert(VERSION_HEADER, HeaderValue::from(snapshot.version()));
    response
}

/// Runs `f` against one snapshot, tagging errors with its version.
fn with_snapshot<F>(state: &AppState, f: F) -> Result<Response, ApiError>
where
    F: FnOnce(&CatalogSnapshot) -> Result<Response, ApiError>,
{
    let snapshot = load(state)?;
    f(&snapshot).map_err(|e| e.at_version(snapshot.version()))
}

#[derive(Debug, Deserialize)]
pub struct DatasetsParams {
    pub query: Option<String>,
    pub features: Option<String>,
}

async fn datasets(
    State(state): State<AppState>,
    Query(params): Query<DatasetsParams>,
) -> Result<Response, ApiError> {
    with_snapshot(&state, |snap| {
        let rows = select_datasets(snap, params.query.as_deref(), params.features.as_deref())?;
        Ok(json(snap, StatusCode::OK, &rows))
    })
}

async fn schema(State(state): State<AppState>) -> Result<Response, ApiError> {
    with_snapshot(&state, |snap| Ok(json(snap, StatusCode::OK, &snap.schema_names())))
}

async fn dataset(State(state): State<AppState>, Path(index): Path<String>) -> Result<Response, ApiError> {
    with_snapshot(&state, |snap| {
        let index: i64 = index
            .parse()
            .map_err(|_| ApiError::bad_request("InvalidIndex", format!("{index:?} is not an integer")))?;
        Ok(json(snap, StatusCode::OK, snap.get_record(index)?))
    })
}

#[derive(Debug, Deserialize)]
pub struct FeaturesParams {
    pub features: Option<String>,
}

async fn tags(
    State(state): State<AppState>,
    Query(params): Query<FeaturesParams>,
) -> Result<Response, ApiError> {
    with_snapshot(&state, |snap| {
        let features = parse_feature_list(params.features.as_deref());
        Ok(json(snap, StatusCode::OK, &snap.unique_tags(&features)?))
    })
}

/// Counts for each configured feature present in the schema.
pub fn stats_payload(snapshot: &CatalogSnapshot, features: &[String]) -> IndexMap<String, Vec<FeatureCount>> {
    features
        .iter()
        .filter_map(|f| match snapshot.feature_counts(f) {
            Ok(counts) => Some((f.clone(), counts)),
            Err(e) => {
                tracing::warn!(feature = %f, error = %e, "skipping stats feature");
                None
            }
        })
        .collect()
}

async fn stats(State(state): State<AppState>) -> Result<Response, ApiError> {
    with_snapshot(&state, |snap| {
        Ok(json(snap, StatusCode::OK, &stats_payload(snap, &state.stats_features)))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPoint {
    pub index: usize,
    pub name: Option<String>,
    pub x: f64,
    pub y: f64,
    pub cluster: usize,
}

/// One point per record, or `None` without a cluster model.
pub fn cluster_points(snapshot: &CatalogSnapshot) -> Option<Vec<ClusterPoint>> {
    let model = snapshot.clusters()?;
    Some(
        snapshot
            .records()
            .iter()
            .map(|r| ClusterPoint {
                index: r.index,
                name: match r.value("Name") {
                    Value::Text(s) => Some(s.clone()),
                    _ => None,
                },
                x: model.coords2d.get(r.index, 0),
                y: model.coords2d.get(r.index, 1),
                cluster: model.assignments[r.index],
            })
            .collect(),
    )
}

async fn clusters(State(state): State<AppState>) -> Result<Response, ApiError> {
    with_snapshot(&state, |snap| {
        let points = cluster_points(snap).ok_or_else(|| {
            ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "ClustersUnavailable",
                "no cluster model has been built for this catalogue",
            )
        })?;
        Ok(json(snap, StatusCode::OK, &points))
    })
}

#[derive(Serialize)]
struct Created<'a> {
    id: &'a str,
}

async fn submit_report(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: ReportRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request("ValidationError", e.to_string()))?;
    with_snapshot(&state, |snap| {
        let report = state.reports.submit(request, snap)?;
        Ok(json(snap, StatusCode::CREATED, &Created { id: &report.id }))
    })
}
