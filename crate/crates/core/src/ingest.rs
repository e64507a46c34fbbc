//! Raw tabular sources (CSV or JSON) to validated [`DatasetRecord`]s.
//!
//! Ingestion is lenient: a cell that cannot be coerced to its feature kind is
//! stored as `Missing` and reported in the diagnostics; the row is kept. A
//! schema feature absent from the source header is filled with `Missing` for
//! every row and reported once.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::CatalogError;
use crate::record::{DatasetRecord, RecordFields};
use crate::schema::{Feature, FeatureKind, Schema, Value};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for SourceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(SourceFormat::Csv),
            "json" => Ok(SourceFormat::Json),
            other => Err(format!("unknown source format {other:?}")),
        }
    }
}

impl SourceFormat {
    /// Guesses the format from a path or URL suffix, defaulting to CSV.
    pub fn from_location(location: &str) -> Self {
        let lower = location.to_ascii_lowercase();
        if lower.ends_with(".json") {
            SourceFormat::Json
        } else {
            SourceFormat::Csv
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// The cell could not be read as the feature's kind; stored as `Missing`.
    Uncoercible { raw: String, expected: FeatureKind },
    /// The feature has no column in the source; every row holds `Missing`.
    MissingColumn,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 0-based data row, `None` for source-wide problems.
    pub row: Option<usize>,
    pub feature: String,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, self.row) {
            (DiagnosticKind::Uncoercible { raw, expected }, Some(row)) => write!(
                f,
                "row {row}, feature {:?}: cannot coerce {raw:?} to {expected}",
                self.feature
            ),
            (DiagnosticKind::Uncoercible { raw, expected }, None) => write!(
                f,
                "feature {:?}: cannot coerce {raw:?} to {expected}",
                self.feature
            ),
            (DiagnosticKind::MissingColumn, _) => write!(
                f,
                "feature {:?}: no such column in source header; filled with missing values",
                self.feature
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ingested {
    pub records: Vec<DatasetRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn ingest(raw: &[u8], format: SourceFormat, schema: &Schema) -> Result<Ingested, CatalogError> {
    match format {
        SourceFormat::Csv => ingest_csv(raw, schema),
        SourceFormat::Json => ingest_json(raw, schema),
    }
}

pub fn ingest_csv(raw: &[u8], schema: &Schema) -> Result<Ingested, CatalogError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(raw);
    let header = reader
        .headers()
        .map_err(|e| CatalogError::SourceUnreadable(e.to_string()))?
        .clone();
    if header.iter().all(|h| h.trim().is_empty()) {
        return Err(CatalogError::SourceUnreadable("missing header row".into()));
    }

    let mut diagnostics = Vec::new();
    let columns: Vec<Option<usize>> = schema
        .features()
        .iter()
        .map(|feature| {
            let col = header.iter().position(|h| h.trim() == feature.name);
            if col.is_none() {
                diagnostics.push(Diagnostic {
                    row: None,
                    feature: feature.name.clone(),
                    kind: DiagnosticKind::MissingColumn,
                });
            }
            col
        })
        .collect();

    let mut records = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let fields = result.map_err(|e| CatalogError::SourceUnreadable(e.to_string()))?;
        let mut values = RecordFields::with_capacity(schema.len());
        for (feature, col) in schema.features().iter().zip(&columns) {
            let cell = col.and_then(|c| fields.get(c)).unwrap_or("");
            let value = coerce_text(feature, cell).unwrap_or_else(|| {
                diagnostics.push(uncoercible(row, feature, cell));
                Value::Missing
            });
            values.insert(feature.name.clone(), value);
        }
        records.push(DatasetRecord::new(row, values));
    }
    Ok(Ingested { records, diagnostics })
}

pub fn ingest_json(raw: &[u8], schema: &Schema) -> Result<Ingested, CatalogError> {
    let doc: Json =
        serde_json::from_slice(raw).map_err(|e| CatalogError::SourceUnreadable(e.to_string()))?;
    let Json::Array(rows) = doc else {
        return Err(CatalogError::SourceUnreadable(
            "expected a JSON array of objects".into(),
        ));
    };

    let mut diagnostics = Vec::new();
    let mut records = Vec::with_capacity(rows.len());
    let mut seen = vec![false; schema.len()];
    for (row, item) in rows.iter().enumerate() {
        let Json::Object(object) = item else {
            return Err(CatalogError::SourceUnreadable(format!(
                "element {row} is not a JSON object"
            )));
        };
        let mut values = RecordFields::with_capacity(schema.len());
        for (pos, feature) in schema.features().iter().enumerate() {
            let cell = object.get(&feature.name);
            seen[pos] |= cell.is_some();
            let value = match cell {
                None | Some(Json::Null) => Value::Missing,
                Some(cell) => coerce_json(feature, cell).unwrap_or_else(|| {
                    diagnostics.push(uncoercible(row, feature, &cell.to_string()));
                    Value::Missing
                }),
            };
            values.insert(feature.name.clone(), value);
        }
        records.push(DatasetRecord::new(row, values));
    }
    if !rows.is_empty() {
        let missing = schema
            .features()
            .iter()
            .zip(&seen)
            .filter(|(_, seen)| !**seen)
            .map(|(feature, _)| Diagnostic {
                row: None,
                feature: feature.name.clone(),
                kind: DiagnosticKind::MissingColumn,
            });
        // Source-wide diagnostics lead, as in the CSV path.
        diagnostics.splice(0..0, missing);
    }
    Ok(Ingested { records, diagnostics })
}

fn uncoercible(row: usize, feature: &Feature, raw: &str) -> Diagnostic {
    Diagnostic {
        row: Some(row),
        feature: feature.name.clone(),
        kind: DiagnosticKind::Uncoercible {
            raw: raw.to_string(),
            expected: feature.kind,
        },
    }
}

/// Coerces one textual cell. `None` means the cell is not valid for the kind.
pub fn coerce_text(feature: &Feature, cell: &str) -> Option<Value> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Some(Value::Missing);
    }
    match feature.kind {
        FeatureKind::Text => Some(Value::Text(cell.to_string())),
        FeatureKind::Integer => cell.parse::<i64>().ok().map(Value::Integer),
        FeatureKind::TextList => Some(Value::TextList(split_list(cell, feature.list_delimiter()))),
    }
}

fn coerce_json(feature: &Feature, cell: &Json) -> Option<Value> {
    match (feature.kind, cell) {
        (_, Json::String(s)) => coerce_text(feature, s),
        (FeatureKind::Integer, Json::Number(n)) => n.as_i64().map(Value::Integer),
        (FeatureKind::Text, Json::Number(n)) => Some(Value::Text(n.to_string())),
        (FeatureKind::Text, Json::Bool(b)) => Some(Value::Text(b.to_string())),
        (FeatureKind::TextList, Json::Array(items)) => items
            .iter()
            .map(|item| item.as_str().map(str::trim))
            .filter(|item| item != &Some(""))
            .map(|item| item.map(str::to_string))
            .collect::<Option<Vec<_>>>()
            .map(Value::TextList),
        _ => None,
    }
}

/// Splits a list cell, trimming elements and dropping empty ones.
pub fn split_list(cell: &str, delimiter: char) -> Vec<String> {
    cell.split(delimiter)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}
