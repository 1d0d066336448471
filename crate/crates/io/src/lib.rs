//! File formats around the Muskat solver: run configuration, binary field
//! snapshots and per-report time series.

pub mod config;
pub mod error;
pub mod snapshot;
pub mod timeseries;

pub use config::{load_config, parse_config, LoadedConfig, RunConfig};
pub use error::{IoError, Result};
pub use snapshot::{load_snapshot, save_snapshot, SnapshotMeta};
pub use timeseries::{read_timeseries, write_timeseries, Format, Record};
