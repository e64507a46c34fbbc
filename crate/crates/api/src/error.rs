use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use catalogue_core::{to_json_payload, CatalogError, QueryError};
use serde::Serialize;

use crate::VERSION_HEADER;

/// Uniform error body: `{error, detail?, offset?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
    /// Snapshot the error was computed against, if any.
    pub version: Option<u64>,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &str, detail: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: error.to_string(),
                detail: Some(detail.into()),
                offset: None,
            },
            version: None,
        }
    }

    pub fn not_ready() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "NotReady",
            "the catalogue has not been loaded yet",
        )
    }

    pub fn bad_request(error: &str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, error, detail)
    }

    pub fn at_version(mut self, version: u64) -> Self {
        self.version = Some(version);
        self
    }
}

impl From<QueryError> for ApiError {
    fn from(err: QueryError) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                error: err.code().to_string(),
                detail: Some(err.to_string()),
                offset: err.offset(),
            },
            version: None,
        }
    }
}

impl From<CatalogError> for ApiError {
    fn from(err: CatalogError) -> Self {
        match &err {
            CatalogError::UnknownFeature(_) => Self::bad_request("UnknownFeature", err.to_string()),
            CatalogError::OutOfRange { .. } => {
                Self::new(StatusCode::NOT_FOUND, "OutOfRange", err.to_string())
            }
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", err.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut response = (
            self.status,
            [(header::CONTENT_TYPE, "application/json")],
            to_json_payload(&self.body),
        )
            .into_response();
        if let Some(version) = self.version {
            response
                .headers_mut()
                .insert(VERSION_HEADER, HeaderValue::from(version));
        }
        response
    }
}
