//! Scenario simulation: arrivals, the run loop, the event log and metrics.

pub mod arrivals;
pub mod engine;
pub mod log;
pub mod metrics;
pub mod path;
pub mod spec;

pub use arrivals::{spawn_arrivals, stream, stream_seed, Arrival};
pub use engine::{plan_entries, run, Entry, World};
pub use log::{format_path, leader_path_from_log, parse_path};
pub use metrics::{fuel_consumed, path_fuel, RunResult, Summary, VehicleRecord};
pub use path::LeaderPath;
pub use spec::{Cadence, ControllerKind, ControllerSpec, DemandSpec, ExperimentSpec, FuelModel, ScenarioSpec};
