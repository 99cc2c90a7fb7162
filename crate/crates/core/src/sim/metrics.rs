//! Per-vehicle records, run summaries and the surrogate fuel model.

use serde::{Deserialize, Serialize};

use super::path::LeaderPath;
use super::spec::{ControllerKind, FuelModel};
use crate::geometry::{Approach, Movement};
use crate::platoon::{PlatoonId, VehicleState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleRecord {
    pub vehicle_id: u64,
    pub platoon_id: PlatoonId,
    /// Position inside its platoon, 0 for the leader.
    pub index: u32,
    pub approach: Approach,
    pub movement: Movement,
    /// Time the vehicle wanted to enter the schedule zone.
    pub entry_time: f64,
    /// Time the vehicle left the merging zone.
    pub exit_time: f64,
    pub travel_time: f64,
    pub delay: f64,
    pub fuel: f64,
}

impl VehicleRecord {
    pub const CSV_HEADER: &'static str =
        "vehicle_id,platoon_id,index,approach,movement,entry_time,exit_time,travel_time,delay,fuel";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.vehicle_id,
            self.platoon_id,
            self.index,
            self.approach,
            self.movement,
            self.entry_time,
            self.exit_time,
            self.travel_time,
            self.delay,
            self.fuel
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub controller: ControllerKind,
    pub seed: u64,
    pub max_platoon_size: u32,
    pub horizon: f64,
    pub spawned_vehicles: u64,
    pub exited_vehicles: u64,
    pub exited_by_horizon: u64,
    pub in_flight_at_horizon: u64,
    pub in_flight_at_end: u64,
    pub platoons: u64,
    pub average_travel_time: f64,
    pub average_delay: f64,
    pub total_fuel: f64,
    pub average_fuel: f64,
    pub throughput: u64,
    pub max_lateness: f64,
    pub stop_wait_plans: u64,
    pub end_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub summary: Summary,
    pub vehicles: Vec<VehicleRecord>,
    pub log: String,
}

impl RunResult {
    pub fn vehicles_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.vehicles.len() + 1));
        out.push_str(VehicleRecord::CSV_HEADER);
        out.push('\n');
        for v in &self.vehicles {
            out.push_str(&v.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Trapezoidal integral of the fuel rate over states sampled every `dt`.
pub fn fuel_consumed(samples: &[VehicleState], dt: f64, model: &FuelModel) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * dt * (model.rate(w[0].velocity, w[0].control) + model.rate(w[1].velocity, w[1].control)))
        .sum()
}

/// Fuel burnt by a vehicle following `path` on `[t_a, t_b]`, sampled every
/// `dt` (the last interval is shortened to end at `t_b`).
pub fn path_fuel(path: &LeaderPath, t_a: f64, t_b: f64, dt: f64, model: &FuelModel) -> f64 {
    if !(t_b > t_a) {
        return 0.0;
    }
    let rate = |t: f64| {
        let s = path.state_at(t);
        model.rate(s.velocity.max(0.0), s.control)
    };
    let mut total = 0.0;
    let mut t = t_a;
    let mut r = rate(t);
    let mut k = 1u64;
    loop {
        let next = (t_a + k as f64 * dt).min(t_b);
        let rn = rate(next);
        total += 0.5 * (next - t) * (r + rn);
        if next >= t_b {
            break;
        }
        t = next;
        r = rn;
        k += 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::Segment;

    #[test]
    fn idling_burns_c0_per_second() {
        let m = FuelModel::default();
        let s = vec![VehicleState::default(); 101];
        assert!((fuel_consumed(&s, 0.1, &m) - m.c0 * 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_model_burns_nothing() {
        let s: Vec<_> = (0..50).map(|k| VehicleState::new(k as f64, 10.0, 1.0)).collect();
        assert_eq!(fuel_consumed(&s, 0.1, &FuelModel::zero()), 0.0);
    }

    #[test]
    fn cruise_matches_closed_form() {
        let m = FuelModel::default();
        let v: f64 = 18.0;
        let exact = 10.0 * (m.c0 + m.c1 * v + m.c2 * v * v + m.c3 * v.powi(3));
        let path = LeaderPath::new(vec![Segment::constant(0.0, f64::INFINITY, 0.0, v, 0.0)]);
        assert!((path_fuel(&path, 0.0, 10.0, 0.1, &m) - exact).abs() < 1e-9);
        assert!((path_fuel(&path, 0.0, 10.0, 0.37, &m) - exact).abs() < 1e-9);
    }

    #[test]
    fn csv_row_matches_header_width() {
        let r = VehicleRecord {
            vehicle_id: 1,
            platoon_id: 1,
            index: 0,
            approach: Approach::North,
            movement: Movement::new(Approach::North, crate::geometry::Turn::Left),
            entry_time: 0.0,
            exit_time: 20.0,
            travel_time: 20.0,
            delay: 1.5,
            fuel: 3.0,
        };
        assert_eq!(
            r.csv_row().split(',').count(),
            VehicleRecord::CSV_HEADER.split(',').count()
        );
        assert!(r.csv_row().contains(",N.L,"));
    }
}
