use thiserror::Error;

use crate::platoon::PlatoonId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("platoon state is infeasible: {0}")]
    InfeasibleState(String),

    /// Acceleration distance exceeds the schedule zone length.
    #[error("schedule zone too short: acceleration needs {needed:.3} m but only {available:.3} m remain")]
    AssumptionViolation { needed: f64, available: f64 },

    #[error("requested schedule is infeasible: {0}")]
    InfeasibleSchedule(String),

    #[error("graph has {vertices} vertices, above the configured cap of {cap}")]
    Capacity { vertices: usize, cap: usize },

    #[error("time {t} outside trajectory domain [{start}, {end}]")]
    Domain { t: f64, start: f64, end: f64 },

    #[error("unknown platoon id {0}")]
    UnknownPlatoon(PlatoonId),

    #[error("safety violation at t={time:.3}: {report}")]
    SafetyViolation { time: f64, report: String },

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("scenario validation error: `{key}` {reason}")]
    Validation { key: String, reason: String },

    #[error("cell {cell}: {source}")]
    Cell { cell: String, source: Box<Error> },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
