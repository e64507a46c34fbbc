use indexmap::IndexMap;
use serde::{Serialize, Serializer};

use crate::schema::Value;

/// Feature name to value, in schema order.
pub type RecordFields = IndexMap<String, Value>;

/// One dataset's metadata.
///
/// `index` is the 0-based position of the row in the source; it is not part
/// of the serialized form, which is just the field map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRecord {
    pub index: usize,
    pub values: RecordFields,
}

impl DatasetRecord {
    pub fn new(index: usize, values: RecordFields) -> Self {
        Self { index, values }
    }

    /// Value of `feature`, `None` if the record has no such entry.
    pub fn get(&self, feature: &str) -> Option<&Value> {
        self.values.get(feature)
    }

    /// Like [`get`](Self::get), but absent entries read as `Missing`.
    pub fn value(&self, feature: &str) -> &Value {
        self.values.get(feature).unwrap_or(&Value::Missing)
    }
}

impl Serialize for DatasetRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.values.serialize(serializer)
    }
}
