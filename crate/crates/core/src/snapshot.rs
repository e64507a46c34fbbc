//! Immutable, versioned catalogue snapshots and their read primitives.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};

use crate::cluster::ClusterModel;
use crate::error::CatalogError;
use crate::record::{DatasetRecord, RecordFields};
use crate::schema::{Schema, Value};

/// One distinct value of a feature, as exposed by tags and counts.
///
/// The derived order compares integers numerically and text by bytes; a
/// single feature only ever produces one variant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TagValue {
    Integer(i64),
    Text(String),
}

impl Serialize for TagValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            TagValue::Integer(n) => serializer.serialize_i64(*n),
            TagValue::Text(s) => serializer.serialize_str(s),
        }
    }
}

/// The values a cell contributes to tags and counts: list elements
/// individually, nothing for `Missing`.
pub fn contributions(value: &Value) -> Vec<TagValue> {
    match value {
        Value::Text(s) => vec![TagValue::Text(s.clone())],
        Value::Integer(n) => vec![TagValue::Integer(*n)],
        Value::TextList(items) => items.iter().cloned().map(TagValue::Text).collect(),
        Value::Missing => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureCount {
    pub value: TagValue,
    pub count: usize,
}

/// The unit served to every read request. Never mutated after construction;
/// share it behind an `Arc`.
#[derive(Debug, Clone)]
pub struct CatalogSnapshot {
    version: u64,
    schema: Arc<Schema>,
    records: Vec<DatasetRecord>,
    tag_index: IndexMap<String, Vec<TagValue>>,
    clusters: Option<ClusterModel>,
    built_at: i64,
    checksum: Option<String>,
}

impl CatalogSnapshot {
    /// Builds a snapshot and its tag index.
    ///
    /// Records are renumbered so that `records[i].index == i`.
    pub fn new(
        version: u64,
        schema: Arc<Schema>,
        mut records: Vec<DatasetRecord>,
        clusters: Option<ClusterModel>,
        built_at: i64,
    ) -> Self {
        for (i, record) in records.iter_mut().enumerate() {
            record.index = i;
        }
        let tag_index = build_tag_index(&schema, &records);
        Self {
            version,
            schema,
            records,
            tag_index,
            clusters,
            built_at,
            checksum: None,
        }
    }

    /// Builds an unversioned (version 0) snapshot with no cluster model, as
    /// used by offline tooling.
    pub fn offline(schema: Arc<Schema>, records: Vec<DatasetRecord>) -> Self {
        Self::new(0, schema, records, None, 0)
    }

    pub fn with_checksum(mut self, checksum: impl Into<String>) -> Self {
        self.checksum = Some(checksum.into());
        self
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn records(&self) -> &[DatasetRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn clusters(&self) -> Option<&ClusterModel> {
        self.clusters.as_ref()
    }

    pub fn built_at(&self) -> i64 {
        self.built_at
    }

    pub fn checksum(&self) -> Option<&str> {
        self.checksum.as_deref()
    }

    pub fn tag_index(&self) -> &IndexMap<String, Vec<TagValue>> {
        &self.tag_index
    }

    pub fn schema_names(&self) -> Vec<String> {
        self.schema.names().map(str::to_string).collect()
    }

    pub fn get_record(&self, index: i64) -> Result<&DatasetRecord, CatalogError> {
        usize::try_from(index)
            .ok()
            .and_then(|i| self.records.get(i))
            .ok_or(CatalogError::OutOfRange {
                index,
                len: self.records.len(),
            })
    }

    /// Sorted unique values per requested feature, in schema order. An empty
    /// request returns every feature.
    pub fn unique_tags<S: AsRef<str>>(
        &self,
        features: &[S],
    ) -> Result<IndexMap<String, Vec<TagValue>>, CatalogError> {
        let positions = self.schema.resolve(features)?;
        Ok(positions
            .into_iter()
            .map(|pos| {
                let name = &self.schema.features()[pos].name;
                (name.clone(), self.tag_index[name].clone())
            })
            .collect())
    }

    /// Value histogram for one feature: count descending, ties by value
    /// ascending. List elements count individually; `Missing` is skipped.
    pub fn feature_counts(&self, feature: &str) -> Result<Vec<FeatureCount>, CatalogError> {
        if self.schema.position(feature).is_none() {
            return Err(CatalogError::UnknownFeature(feature.to_string()));
        }
        let mut counts: HashMap<TagValue, usize> = HashMap::new();
        for record in &self.records {
            for tag in contributions(record.value(feature)) {
                *counts.entry(tag).or_default() += 1;
            }
        }
        let mut counts: Vec<FeatureCount> = counts
            .into_iter()
            .map(|(value, count)| FeatureCount { value, count })
            .collect();
        counts.sort_by(|a, b| match b.count.cmp(&a.count) {
            Ordering::Equal => a.value.cmp(&b.value),
            other => other,
        });
        Ok(counts)
    }
}

fn build_tag_index(schema: &Schema, records: &[DatasetRecord]) -> IndexMap<String, Vec<TagValue>> {
    schema
        .features()
        .iter()
        .map(|feature| {
            let set: BTreeSet<TagValue> = records
                .iter()
                .flat_map(|r| contributions(r.value(&feature.name)))
                .collect();
            (feature.name.clone(), set.into_iter().collect())
        })
        .collect()
}

/// Restricts records to the requested features (schema order). An empty
/// request keeps every feature.
pub fn project_features<'a, S: AsRef<str>>(
    schema: &Schema,
    records: impl IntoIterator<Item = &'a DatasetRecord>,
    features: &[S],
) -> Result<Vec<RecordFields>, CatalogError> {
    let positions = schema.resolve(features)?;
    let names: Vec<&str> = positions
        .iter()
        .map(|&pos| schema.features()[pos].name.as_str())
        .collect();
    Ok(records
        .into_iter()
        .map(|record| {
            names
                .iter()
                .map(|&name| (name.to_string(), record.value(name).clone()))
                .collect()
        })
        .collect())
}
