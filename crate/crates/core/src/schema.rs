//! Feature schema and typed metadata values.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CatalogError;

/// Default element separator for [`FeatureKind::TextList`] cells.
pub const DEFAULT_LIST_DELIMITER: char = ',';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Text,
    Integer,
    TextList,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FeatureKind::Text => "text",
            FeatureKind::Integer => "integer",
            FeatureKind::TextList => "text_list",
        };
        f.write_str(name)
    }
}

/// One declared feature of the catalogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
    /// Only meaningful for `text_list` features.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<char>,
}

impl Feature {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        Self {
            name: name.into(),
            kind,
            delimiter: None,
        }
    }

    pub fn list_delimiter(&self) -> char {
        self.delimiter.unwrap_or(DEFAULT_LIST_DELIMITER)
    }
}

#[derive(Deserialize)]
struct SchemaFile {
    features: Vec<Feature>,
}

/// Ordered feature declarations with a name lookup index.
///
/// Order is the declaration order of the schema configuration and drives the
/// key order of every serialized record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    features: Vec<Feature>,
    by_name: HashMap<String, usize>,
}

impl Schema {
    pub fn new(features: Vec<Feature>) -> Result<Self, CatalogError> {
        if features.is_empty() {
            return Err(CatalogError::InvalidSchema("schema declares no features".into()));
        }
        let mut by_name = HashMap::with_capacity(features.len());
        for (pos, feature) in features.iter().enumerate() {
            if feature.name.is_empty() {
                return Err(CatalogError::InvalidSchema(format!(
                    "feature #{pos} has an empty name"
                )));
            }
            if by_name.insert(feature.name.clone(), pos).is_some() {
                return Err(CatalogError::InvalidSchema(format!(
                    "duplicate feature name {:?}",
                    feature.name
                )));
            }
        }
        Ok(Self { features, by_name })
    }

    /// Parses the JSON schema configuration: `{"features": [{"name", "kind", "delimiter"?}]}`.
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let file: SchemaFile = serde_json::from_str(text)
            .map_err(|e| CatalogError::InvalidSchema(e.to_string()))?;
        Self::new(file.features)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            CatalogError::InvalidSchema(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn feature(&self, name: &str) -> Option<&Feature> {
        self.position(name).map(|pos| &self.features[pos])
    }

    pub fn kind_of(&self, name: &str) -> Option<FeatureKind> {
        self.feature(name).map(|f| f.kind)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    /// Resolves requested feature names to schema positions, sorted into
    /// schema order and deduplicated. An empty request selects every feature.
    pub fn resolve<S: AsRef<str>>(&self, requested: &[S]) -> Result<Vec<usize>, CatalogError> {
        if requested.is_empty() {
            return Ok((0..self.features.len()).collect());
        }
        let mut positions = requested
            .iter()
            .map(|name| {
                let name = name.as_ref();
                self.position(name)
                    .ok_or_else(|| CatalogError::UnknownFeature(name.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        positions.sort_unstable();
        positions.dedup();
        Ok(positions)
    }
}

/// A typed cell value. `Missing` is distinct from the empty string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Text(String),
    Integer(i64),
    TextList(Vec<String>),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn kind(&self) -> Option<FeatureKind> {
        match self {
            Value::Text(_) => Some(FeatureKind::Text),
            Value::Integer(_) => Some(FeatureKind::Integer),
            Value::TextList(_) => Some(FeatureKind::TextList),
            Value::Missing => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Value::Integer(n) => Some(*n),
            _ => None,
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Text(s) => serializer.serialize_str(s),
            Value::Integer(n) => serializer.serialize_i64(*n),
            Value::TextList(items) => items.serialize(serializer),
            Value::Missing => serializer.serialize_none(),
        }
    }
}
