//! Keeps the served catalogue current: fetches the metadata source, rebuilds
//! snapshots (records, tags, embeddings, clusters) and publishes them into a
//! [`SnapshotCell`].

pub mod cell;
pub mod provider;
pub mod rebuild;
pub mod scheduler;
pub mod source;

pub use cell::{SnapshotCell, StaleVersion};
pub use provider::{CountingProvider, Fallback, ProviderConfig, Providers, RemoteProvider};
pub use rebuild::{rebuild, BuildFailure, RebuildConfig, Rebuilt};
pub use scheduler::{Outcome, Pipeline, TickLog, TickRecord};
pub use source::{checksum, fetch_source, FetchFailure, Fetched, SourceConfig};
