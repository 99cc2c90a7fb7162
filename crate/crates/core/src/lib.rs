//! Scheduling and trajectory planning for platoons of connected automated
//! vehicles at a signal-free intersection.

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]


pub mod baselines;
pub mod error;
pub mod geometry;
pub mod io;
pub mod platoon;
pub mod scheduler;
pub mod sim;
pub mod trajectory;

pub use error::{Error, Result};
pub use geometry::{Approach, IntersectionGeometry, Movement, MovementConflictTable, Route, Turn};
pub use platoon::{ControlBounds, Platoon, PlatoonId, PlatoonPhase, VehicleState};
pub use sim::{run, ControllerKind, RunResult, ScenarioSpec, Summary};
