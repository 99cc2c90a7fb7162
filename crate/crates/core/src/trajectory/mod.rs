//! Leader trajectories through the schedule zone.

mod solvers;

pub use solvers::{
    energy_optimal, energy_optimal_from, plan, stop_wait_fallback, stop_wait_from, time_optimal, time_optimal_from,
    Boundary,
};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platoon::{ControlBounds, VehicleState};

/// Slack allowed when evaluating at the ends of a domain.
const DOMAIN_EPS: f64 = 1e-9;
/// Slack allowed when checking speed and control bounds.
const BOUND_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrajectoryKind {
    TimeOptimal,
    EnergyOptimal,
    StopWait,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Law {
    ConstantAccel { u: f64 },
    /// `u(τ) = a τ + b` with `τ` measured from the segment start.
    Cubic { a: f64, b: f64 },
}

/// One closed-form piece. Position and speed at `t_i` are stored so every
/// law is evaluated in local time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_i: f64,
    pub t_f: f64,
    pub p0: f64,
    pub v0: f64,
    pub law: Law,
}

impl Segment {
    pub fn constant(t_i: f64, t_f: f64, p0: f64, v0: f64, u: f64) -> Self {
        Segment {
            t_i,
            t_f,
            p0,
            v0,
            law: Law::ConstantAccel { u },
        }
    }

    pub fn cubic(t_i: f64, t_f: f64, p0: f64, v0: f64, a: f64, b: f64) -> Self {
        Segment {
            t_i,
            t_f,
            p0,
            v0,
            law: Law::Cubic { a, b },
        }
    }

    pub fn duration(&self) -> f64 {
        self.t_f - self.t_i
    }

    /// State at absolute time `t`; no domain check.
    pub fn state_at(&self, t: f64) -> VehicleState {
        let tau = t - self.t_i;
        match self.law {
            Law::ConstantAccel { u } => VehicleState {
                position: self.p0 + self.v0 * tau + 0.5 * u * tau * tau,
                velocity: self.v0 + u * tau,
                control: u,
            },
            Law::Cubic { a, b } => VehicleState {
                position: self.p0 + self.v0 * tau + 0.5 * b * tau * tau + a * tau * tau * tau / 6.0,
                velocity: self.v0 + b * tau + 0.5 * a * tau * tau,
                control: a * tau + b,
            },
        }
    }

    pub fn end_state(&self) -> VehicleState {
        self.state_at(self.t_f)
    }

    /// Position polynomial `a τ³ + b τ² + c τ + d` in local time.
    pub fn position_coefficients(&self) -> [f64; 4] {
        match self.law {
            Law::ConstantAccel { u } => [0.0, 0.5 * u, self.v0, self.p0],
            Law::Cubic { a, b } => [a / 6.0, 0.5 * b, self.v0, self.p0],
        }
    }

    /// `½∫u² dt` over the segment.
    pub fn control_effort(&self) -> f64 {
        let t = self.duration();
        match self.law {
            Law::ConstantAccel { u } => 0.5 * u * u * t,
            Law::Cubic { a, b } => 0.5 * (a * a * t.powi(3) / 3.0 + a * b * t * t + b * b * t),
        }
    }

    /// Extreme speeds over the segment, from endpoints and the vertex.
    fn speed_extrema(&self) -> [(f64, f64); 3] {
        let start = (self.t_i, self.v0);
        let end = (self.t_f, self.end_state().velocity);
        let vertex = match self.law {
            Law::Cubic { a, b } if a != 0.0 => {
                let tau = -b / a;
                if tau > 0.0 && tau < self.duration() {
                    (self.t_i + tau, self.v0 + b * tau + 0.5 * a * tau * tau)
                } else {
                    start
                }
            }
            _ => start,
        };
        [start, vertex, end]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub segments: Vec<Segment>,
    pub t_start: f64,
    pub t_end: f64,
}

impl Trajectory {
    /// Builds from consecutive segments, dropping zero-length pieces.
    pub fn from_segments(kind: TrajectoryKind, segments: Vec<Segment>) -> Result<Self> {
        let segments: Vec<Segment> = segments.into_iter().filter(|s| s.t_f > s.t_i).collect();
        let (first, last) = match (segments.first(), segments.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InfeasibleSchedule("trajectory has no duration".into())),
        };
        Ok(Trajectory {
            kind,
            t_start: first.t_i,
            t_end: last.t_f,
            segments,
        })
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn segment_at(&self, t: f64) -> &Segment {
        let k = self.segments.partition_point(|s| s.t_f < t);
        &self.segments[k.min(self.segments.len() - 1)]
    }

    pub fn evaluate(&self, t: f64) -> Result<VehicleState> {
        if t < self.t_start - DOMAIN_EPS || t > self.t_end + DOMAIN_EPS {
            return Err(Error::Domain {
                t,
                start: self.t_start,
                end: self.t_end,
            });
        }
        Ok(self.segment_at(t).state_at(t.clamp(self.t_start, self.t_end)))
    }

    pub fn start_state(&self) -> VehicleState {
        self.segments[0].state_at(self.t_start)
    }

    pub fn end_state(&self) -> VehicleState {
        self.segments[self.segments.len() - 1].end_state()
    }

    pub fn control_effort(&self) -> f64 {
        self.segments.iter().map(Segment::control_effort).sum()
    }

    /// Samples `(t, state)` every `dt` from `t_start`, always including `t_end`.
    pub fn sample(&self, dt: f64) -> Vec<(f64, VehicleState)> {
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let t = self.t_start + k as f64 * dt;
            if t >= self.t_end - 1e-12 {
                break;
            }
            out.push((t, self.segment_at(t).state_at(t)));
            k += 1;
        }
        out.push((self.t_end, self.end_state()));
        out
    }

    /// `t,p,v,u` rows at spacing `dt`.
    pub fn to_csv(&self, dt: f64) -> String {
        let mut out = String::from("t,p,v,u\n");
        for (t, s) in self.sample(dt) {
            let _ = writeln!(out, "{t},{},{},{}", s.position, s.velocity, s.control);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    Speed,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub time: f64,
    pub quantity: Quantity,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violation: Option<Violation>,
}

/// Checks speed and control bounds analytically on every segment. Speed
/// extrema of a cubic lie at its endpoints or at the vertex of the speed
/// parabola; control is affine so its extrema are at the endpoints.
pub fn feasibility_check(traj: &Trajectory, bounds: &ControlBounds) -> FeasibilityReport {
    for seg in &traj.segments {
        let controls = [
            (seg.t_i, seg.state_at(seg.t_i).control),
            (seg.t_f, seg.state_at(seg.t_f).control),
        ];
        for (time, u) in controls {
            let limit = if u < bounds.u_min - BOUND_EPS {
                Some(bounds.u_min)
            } else if u > bounds.u_max + BOUND_EPS {
                Some(bounds.u_max)
            } else {
                None
            };
            if let Some(limit) = limit {
                return infeasible(time, Quantity::Control, u, limit);
            }
        }
        for (time, v) in seg.speed_extrema() {
            let limit = if v < bounds.v_min - BOUND_EPS {
                Some(bounds.v_min)
            } else if v > bounds.v_max + BOUND_EPS {
                Some(bounds.v_max)
            } else {
                None
            };
            if let Some(limit) = limit {
                return infeasible(time, Quantity::Speed, v, limit);
            }
        }
    }
    FeasibilityReport {
        feasible: true,
        violation: None,
    }
}

fn infeasible(time: f64, quantity: Quantity, value: f64, limit: f64) -> FeasibilityReport {
    FeasibilityReport {
        feasible: false,
        violation: Some(Violation {
            time,
            quantity,
            value,
            limit,
        }),
    }
}
