//! Configuration, persistence and the pipelines behind the command line.

pub mod config;
pub mod initial;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod snapshot;

pub use config::{load_config, parse_config, InitialCondition, RunConfig};
pub use manifest::{read_manifest, RunDir, RunManifest};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotData};
