use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{merging_distance, route_vmax, IntersectionGeometry};
use crate::platoon::{platoon_tail_clearance_time, ControlBounds, Platoon};

/// Speeds within this distance of the limit are treated as cruising at it.
pub(crate) const SPEED_EPS: f64 = 1e-9;

/// Timing quantities of one platoon. `arrival_time_min` and `passing_time`
/// are measured from the instant the leader state was observed; `deadline`
/// and `cruise_arrival` from schedule-zone entry.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlatoonTiming {
    pub arrival_time_min: f64,
    pub crossing_time: f64,
    pub passing_time: f64,
    pub deadline: f64,
    pub cruise_arrival: f64,
    pub accel_duration: f64,
    pub accel_distance: f64,
}

/// Earliest arrival at the merging zone by accelerating at `u_max` to `v_max`
/// and cruising, from speed `v` with `distance` metres left.
/// Returns `(arrival, accel_duration, accel_distance)`.
pub fn earliest_arrival(v: f64, distance: f64, v_max: f64, u_max: f64) -> Result<(f64, f64, f64)> {
    if v > v_max + SPEED_EPS {
        return Err(Error::InfeasibleState(format!("speed {v} exceeds route limit {v_max}")));
    }
    if !(distance >= 0.0) {
        return Err(Error::InfeasibleState(format!("leader is {:.3} m past the merging zone", -distance)));
    }
    if v >= v_max - SPEED_EPS {
        return Ok((distance / v_max, 0.0, 0.0));
    }
    let t_s = (v_max - v) / u_max;
    let d_s = (v_max * v_max - v * v) / (2.0 * u_max);
    if d_s > distance + 1e-9 {
        return Err(Error::AssumptionViolation {
            needed: d_s,
            available: distance,
        });
    }
    Ok((t_s + (distance - d_s).max(0.0) / v_max, t_s, d_s))
}

/// Crossing time `d*/v_max + (n-1) t_h + t_c`.
pub fn crossing_time(platoon: &Platoon, geom: &IntersectionGeometry) -> Result<f64> {
    let d_star = merging_distance(&platoon.route, geom)?;
    let v_max = route_vmax(&platoon.route, geom);
    Ok(d_star / v_max + platoon_tail_clearance_time(platoon.size, platoon.headway) + geom.clearance_time)
}

/// Arrival, crossing and passing times from the leader's current state.
/// The speed cap is resolved from the platoon's route.
pub fn compute_passing_time(
    platoon: &Platoon,
    geom: &IntersectionGeometry,
    bounds: &ControlBounds,
) -> Result<PlatoonTiming> {
    let v_max = route_vmax(&platoon.route, geom);
    let remaining = geom.schedule_zone_length - platoon.leader_state.position;
    let (arrival, t_s, d_s) = earliest_arrival(platoon.leader_state.velocity, remaining, v_max, bounds.u_max)?;
    let crossing = crossing_time(platoon, geom)?;
    Ok(PlatoonTiming {
        arrival_time_min: arrival,
        crossing_time: crossing,
        passing_time: arrival + crossing,
        accel_duration: t_s,
        accel_distance: d_s,
        ..Default::default()
    })
}

/// Adds the cruise arrival and deadline, both from schedule-zone entry at
/// the platoon's entry speed. Entry speeds below `crawl_floor` are raised to
/// it so stopped arrivals still get a finite (late) deadline.
pub fn compute_deadline(
    platoon: &Platoon,
    timing: PlatoonTiming,
    geom: &IntersectionGeometry,
    crawl_floor: f64,
) -> Result<PlatoonTiming> {
    let v = platoon.initial_speed.max(crawl_floor);
    if !(v > 0.0) {
        return Err(Error::InfeasibleState(format!(
            "platoon {} entered stopped; its deadline is undefined without a crawl floor",
            platoon.id
        )));
    }
    let cruise_arrival = geom.schedule_zone_length / v;
    Ok(PlatoonTiming {
        cruise_arrival,
        deadline: cruise_arrival + timing.crossing_time,
        ..timing
    })
}

/// `completion - deadline`; negative when early.
pub fn lateness(completion: f64, deadline: f64) -> f64 {
    completion - deadline
}
