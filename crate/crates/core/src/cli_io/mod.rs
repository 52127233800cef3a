//! Scenario configuration, run orchestration and file formats.

pub mod config;
pub mod run;
pub mod snapshot;

pub use config::{module_rng, module_seed, ConfigError, ScenarioConfig};
pub use run::{fit_order, prepare, pressure_report, run, simulate, OrderFit, RunError, RunOutcome, Scenario};
pub use snapshot::{FieldKind, Snapshot, SnapshotError};
