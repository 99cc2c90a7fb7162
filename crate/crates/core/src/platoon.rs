//! Platoons as double-integrator leaders with time-shifted followers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{route_vmax, IntersectionGeometry, Route};

pub type PlatoonId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    /// Metres from schedule-zone entry.
    pub position: f64,
    pub velocity: f64,
    pub control: f64,
}

impl VehicleState {
    pub fn new(position: f64, velocity: f64, control: f64) -> Self {
        VehicleState {
            position,
            velocity,
            control,
        }
    }

    /// Exact double-integrator update under a constant control held for `dt`.
    pub fn advance(&self, control: f64, dt: f64) -> VehicleState {
        VehicleState {
            position: self.position + self.velocity * dt + 0.5 * control * dt * dt,
            velocity: self.velocity + control * dt,
            control,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlBounds {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl ControlBounds {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        let b = ControlBounds {
            u_min,
            u_max,
            v_min,
            v_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_min < 0.0 && 0.0 < self.u_max) {
            return Err(Error::Configuration(format!(
                "control bounds need u_min < 0 < u_max, got [{}, {}]",
                self.u_min, self.u_max
            )));
        }
        if !(0.0 <= self.v_min && self.v_min < self.v_max) {
            return Err(Error::Configuration(format!(
                "speed bounds need 0 <= v_min < v_max, got [{}, {}]",
                self.v_min, self.v_max
            )));
        }
        Ok(())
    }

    /// Same acceleration limits with the speed cap resolved for `route`.
    pub fn for_route(&self, route: &Route, geom: &IntersectionGeometry) -> ControlBounds {
        ControlBounds {
            v_max: route_vmax(route, geom),
            ..*self
        }
    }

    pub fn brake(&self) -> f64 {
        -self.u_min
    }
}

impl Default for ControlBounds {
    fn default() -> Self {
        ControlBounds {
            u_min: -3.0,
            u_max: 3.0,
            v_min: 0.0,
            v_max: 18.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PlatoonPhase {
    InScheduleZone,
    InMergingZone,
    Exited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Platoon {
    pub id: PlatoonId,
    pub size: u32,
    pub route: Route,
    /// Time headway between consecutive members.
    pub headway: f64,
    pub leader_state: VehicleState,
    /// Schedule-zone entry time `t0`.
    pub entry_time: f64,
    pub initial_speed: f64,
    pub phase: PlatoonPhase,
    /// Merging-zone entry time `tm` once scheduled.
    pub assigned_entry: Option<f64>,
    pub exit_time: Option<f64>,
}

impl Platoon {
    /// A platoon that has just crossed into the schedule zone.
    pub fn entering(id: PlatoonId, size: u32, route: Route, headway: f64, entry_time: f64, speed: f64) -> Result<Self> {
        if size < 1 {
            return Err(Error::InfeasibleState(format!("platoon {id} has no vehicles")));
        }
        if !(headway > 0.0) {
            return Err(Error::InfeasibleState(format!("platoon {id} headway must be > 0, got {headway}")));
        }
        if !(speed >= 0.0) {
            return Err(Error::InfeasibleState(format!("platoon {id} entry speed must be >= 0, got {speed}")));
        }
        Ok(Platoon {
            id,
            size,
            route,
            headway,
            leader_state: VehicleState::new(0.0, speed, 0.0),
            entry_time,
            initial_speed: speed,
            phase: PlatoonPhase::InScheduleZone,
            assigned_entry: None,
            exit_time: None,
        })
    }

    pub fn advance_phase(&mut self, next: PlatoonPhase) -> Result<()> {
        if next < self.phase {
            return Err(Error::InfeasibleState(format!(
                "platoon {} cannot move from {:?} back to {:?}",
                self.id, self.phase, next
            )));
        }
        self.phase = next;
        Ok(())
    }

    pub fn assign_entry(&mut self, tm: f64) -> Result<()> {
        if tm < self.entry_time {
            return Err(Error::InfeasibleSchedule(format!(
                "platoon {} assigned merging entry {tm} before its schedule-zone entry {}",
                self.id, self.entry_time
            )));
        }
        self.assigned_entry = Some(tm);
        Ok(())
    }

    pub fn set_exit(&mut self, te: f64) -> Result<()> {
        match self.assigned_entry {
            Some(tm) if te > tm => {
                self.exit_time = Some(te);
                Ok(())
            }
            Some(tm) => Err(Error::InfeasibleSchedule(format!(
                "platoon {} exit {te} does not follow its entry {tm}",
                self.id
            ))),
            None => Err(Error::InfeasibleSchedule(format!("platoon {} has no merging entry", self.id))),
        }
    }

    /// Time offset of member `index` (0 = leader) behind the leader.
    pub fn member_offset(&self, index: u32) -> f64 {
        index as f64 * self.headway
    }
}

/// Gap to the vehicle ahead at speed `v` with time headway `t_h`.
pub fn space_headway(v: f64, t_h: f64) -> f64 {
    v * t_h
}

/// Extra time the tail needs to clear a point after the leader: `(n - 1) t_h`.
pub fn platoon_tail_clearance_time(n: u32, t_h: f64) -> f64 {
    n.saturating_sub(1) as f64 * t_h
}

/// Hands out platoon ids in strictly increasing schedule-zone entry order.
#[derive(Debug, Default, Clone)]
pub struct IdAllocator {
    next: PlatoonId,
}

impl IdAllocator {
    pub fn new() -> Self {
        IdAllocator { next: 1 }
    }

    pub fn next_id(&mut self) -> PlatoonId {
        let id = self.next.max(1);
        self.next = id + 1;
        id
    }
}
