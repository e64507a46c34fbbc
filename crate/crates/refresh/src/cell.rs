use std::sync::{Arc, RwLock};

use catalogue_core::CatalogSnapshot;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("refusing to publish version {offered}: live version is {live}")]
pub struct StaleVersion {
    pub live: u64,
    pub offered: u64,
}

/// Holder of the live snapshot. Readers clone the `Arc` once per request and
/// keep using it even if a newer snapshot is published meanwhile.
#[derive(Debug, Default)]
pub struct SnapshotCell {
    current: RwLock<Option<Arc<CatalogSnapshot>>>,
}

impl SnapshotCell {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_snapshot(snapshot: Arc<CatalogSnapshot>) -> Self {
        Self {
            current: RwLock::new(Some(snapshot)),
        }
    }

    /// The live snapshot, or `None` before the first publication.
    pub fn load(&self) -> Option<Arc<CatalogSnapshot>> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn version(&self) -> Option<u64> {
        self.load().map(|s| s.version())
    }

    /// Swaps in `snapshot`. Versions must strictly increase.
    pub fn publish(&self, snapshot: Arc<CatalogSnapshot>) -> Result<(), StaleVersion> {
        let mut guard = self.current.write().unwrap_or_else(|e| e.into_inner());
        if let Some(live) = guard.as_ref() {
            if snapshot.version() <= live.version() {
                return Err(StaleVersion {
                    live: live.version(),
                    offered: snapshot.version(),
                });
            }
        }
        *guard = Some(snapshot);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use catalogue_core::{Feature, FeatureKind, Schema};

    fn snap(version: u64) -> Arc<CatalogSnapshot> {
        let schema = Arc::new(Schema::new(vec![Feature::new("Name", FeatureKind::Text)]).unwrap());
        Arc::new(CatalogSnapshot::new(version, schema, vec![], None, 0))
    }

    #[test]
    fn empty_until_published() {
        let cell = SnapshotCell::new();
        assert!(cell.load().is_none());
        cell.publish(snap(1)).unwrap();
        assert_eq!(cell.version(), Some(1));
    }

    #[test]
    fn versions_only_increase() {
        let cell = SnapshotCell::with_snapshot(snap(3));
        assert_eq!(cell.publish(snap(3)), Err(StaleVersion { live: 3, offered: 3 }));
        assert_eq!(cell.publish(snap(2)), Err(StaleVersion { live: 3, offered: 2 }));
        cell.publish(snap(4)).unwrap();
        assert_eq!(cell.version(), Some(4));
    }

    #[test]
    fn readers_keep_their_snapshot_across_a_swap() {
        let cell = SnapshotCell::with_snapshot(snap(1));
        let held = cell.load().unwrap();
        cell.publish(snap(2)).unwrap();
        assert_eq!(held.version(), 1);
        assert_eq!(cell.version(), Some(2));
    }
}
