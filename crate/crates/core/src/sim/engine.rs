//! The simulation loop.
//!
//! Arrivals, commitments and lane-group admissions happen at their exact
//! times; merging-zone bookkeeping, the occupancy monitor and lane-group
//! selection run on a fixed step grid. Leader motion is closed form, so the
//! step only sets the sampling granularity.

use std::fmt::Write as _;

use super::arrivals::{spawn_arrivals, Arrival};
use super::log::format_path;
use super::metrics::{path_fuel, RunResult, Summary, VehicleRecord};
use super::path::LeaderPath;
use super::spec::{Cadence, ControllerKind, FuelModel, ScenarioSpec};
use crate::baselines::{fcfs_entry, lane_groups, lqf_mwm_controller, split_sizes, FcfsMode, LaneGroup};
use crate::error::{Error, Result};
use crate::geometry::{merging_distance, IntersectionGeometry, Movement, Route};
use crate::platoon::{platoon_tail_clearance_time, ControlBounds, IdAllocator, Platoon, PlatoonPhase};
use crate::scheduler::{
    candidate_for, compute_deadline, compute_passing_time, earliest_arrival, schedule_candidates, CommittedExits, EntryRelease,
    SchedulerConfig,
};
use crate::trajectory::{feasibility_check, plan, Segment, TrajectoryKind};

/// Entry times closer than this are treated as unchanged.
const REPLAN_EPS: f64 = 1e-9;
/// Slack of the occupancy checks.
const SAFETY_EPS: f64 = 1e-6;
/// Platoons commit this far (m) before the last point from which they could
/// still stop and relaunch. A stop-and-wait plan brakes exactly onto that
/// point, so without the margin rounding alone could decide feasibility.
const COMMIT_MARGIN: f64 = 0.5;

/// A platoon as it will enter the schedule zone, after splitting and lane gating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    /// Desired schedule-zone entry of the first vehicle.
    pub desired: f64,
    /// Actual entry, never earlier than `desired`.
    pub t0: f64,
    pub movement: Movement,
    pub size: u32,
    pub sampled_speed: f64,
    pub v0: f64,
    pub first_vehicle: u64,
}

/// Splits arrivals into platoons of at most `max_size` and delays entries so
/// each lane admits one platoon at a time: a platoon may enter only one
/// headway after the previous platoon's last vehicle. A delayed platoon
/// cannot enter faster than the one ahead of it.
pub fn plan_entries(arrivals: &[Arrival], max_size: u32, headway: f64) -> Vec<Entry> {
    let mut chunks = Vec::new();
    let mut vehicle = 1u64;
    for a in arrivals {
        for (first, size) in split_sizes(a.size, max_size) {
            chunks.push(Entry {
                desired: a.time + first as f64 * headway,
                t0: a.time,
                movement: a.movement,
                size,
                sampled_speed: a.speed,
                v0: a.speed,
                first_vehicle: vehicle + first as u64,
            });
        }
        vehicle += a.size as u64;
    }
    chunks.sort_by(|a, b| a.desired.total_cmp(&b.desired).then(a.first_vehicle.cmp(&b.first_vehicle)));
    let mut last: [Option<(f64, u32, f64)>; Movement::COUNT] = [None; Movement::COUNT];
    for c in &mut chunks {
        c.t0 = c.desired;
        c.v0 = c.sampled_speed;
        if let Some((t0, size, v0)) = last[c.movement.index()] {
            let gate = t0 + size as f64 * headway;
            if gate > c.t0 {
                c.t0 = gate;
                c.v0 = c.v0.min(v0);
            }
        }
        last[c.movement.index()] = Some((c.t0, c.size, c.v0));
    }
    chunks.sort_by(|a, b| {
        a.t0.total_cmp(&b.t0)
            .then(a.movement.index().cmp(&b.movement.index()))
            .then(a.first_vehicle.cmp(&b.first_vehicle))
    });
    chunks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Optimal,
    Fcfs(FcfsMode),
    LaneGroups,
}

#[derive(Debug, Clone)]
struct SimPlatoon {
    platoon: Platoon,
    entry: Entry,
    bounds: ControlBounds,
    d_star: f64,
    path: LeaderPath,
    deadline: f64,
    free_flow: f64,
    /// Scheduled merging-zone entry; NaN until planned.
    tm: f64,
    leader_exit: f64,
    /// Tail exit plus clearance.
    release: f64,
    commit_at: f64,
    committed: bool,
}

impl SimPlatoon {
    fn movement(&self) -> Movement {
        self.entry.movement
    }

    fn tail_exit(&self) -> f64 {
        self.leader_exit + platoon_tail_clearance_time(self.platoon.size, self.platoon.headway)
    }
}

#[derive(Debug, Clone)]
struct LaneGroupState {
    groups: Vec<LaneGroup>,
    selected: Option<usize>,
    next_boundary: f64,
    interval_end: f64,
}

/// Full simulation state of one scenario run.
pub struct World {
    geom: IntersectionGeometry,
    config: SchedulerConfig,
    kind: ControllerKind,
    mode: Mode,
    cadence: Cadence,
    fuel: FuelModel,
    dt: f64,
    horizon: f64,
    drain_limit: f64,
    headway: f64,
    lqf_interval: f64,
    seed: u64,
    max_platoon_size: u32,
    record_log: bool,

    entries: Vec<Entry>,
    next_entry: usize,
    spawned_vehicles: u64,
    ids: IdAllocator,
    platoons: Vec<SimPlatoon>,
    uncommitted: Vec<usize>,
    pending: Vec<usize>,
    in_zone: Vec<usize>,
    recent: Vec<usize>,
    exits: CommittedExits,
    lanes: Option<LaneGroupState>,

    step_index: u64,
    now: f64,
    records: Vec<VehicleRecord>,
    exited_vehicles: u64,
    exited_by_horizon: u64,
    stop_wait_plans: u64,
    max_lateness: f64,
    log: String,
}

impl World {
    pub fn new(spec: &ScenarioSpec) -> Result<World> {
        spec.validate()?;
        let x = &spec.experiment;
        let arrivals = spawn_arrivals(&spec.demand, &spec.geometry, x.horizon, x.seed)?;
        World::with_arrivals(spec, &arrivals)
    }

    /// A world fed with the given arrivals instead of the demand model.
    pub fn with_arrivals(spec: &ScenarioSpec, arrivals: &[Arrival]) -> Result<World> {
        spec.validate()?;
        let x = &spec.experiment;
        let kind = spec.controller.kind;
        let max_size = if kind.individual() {
            1
        } else if x.max_platoon_size > 0 {
            x.max_platoon_size
        } else {
            u32::MAX
        };
        let entries = plan_entries(arrivals, max_size, spec.demand.headway);
        let spawned_vehicles = arrivals.iter().map(|a| a.size as u64).sum();
        let config = spec.scheduler_config()?;
        let mode = match kind {
            ControllerKind::OcPlatoon | ControllerKind::OcInd => Mode::Optimal,
            ControllerKind::FcfsPlatoon | ControllerKind::FcfsInd => Mode::Fcfs(spec.controller.fcfs_mode),
            ControllerKind::LqfMwm => Mode::LaneGroups,
        };
        let lanes = (mode == Mode::LaneGroups).then(|| {
            let groups = spec.controller.parsed_groups().expect("validated");
            LaneGroupState {
                groups: lane_groups(&groups),
                selected: None,
                next_boundary: 0.0,
                interval_end: 0.0,
            }
        });
        Ok(World {
            geom: spec.geometry.clone(),
            exits: CommittedExits::new(config.conflicts.clone()),
            config,
            kind,
            mode,
            cadence: spec.controller.cadence,
            fuel: spec.fuel,
            dt: x.dt,
            horizon: x.horizon,
            drain_limit: x.drain_limit,
            headway: spec.demand.headway,
            lqf_interval: spec.controller.lqf_interval,
            seed: x.seed,
            max_platoon_size: x.max_platoon_size,
            record_log: x.record_log,
            entries,
            next_entry: 0,
            spawned_vehicles,
            ids: IdAllocator::new(),
            platoons: Vec::new(),
            uncommitted: Vec::new(),
            pending: Vec::new(),
            in_zone: Vec::new(),
            recent: Vec::new(),
            lanes,
            step_index: 0,
            now: 0.0,
            records: Vec::new(),
            exited_vehicles: 0,
            exited_by_horizon: 0,
            stop_wait_plans: 0,
            max_lateness: f64::NEG_INFINITY,
            log: String::new(),
        })
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Number of platoons in the schedule zone or merging zone.
    pub fn active_platoons(&self) -> usize {
        self.uncommitted.len() + self.pending.len() + self.in_zone.len()
    }

    /// Vehicles spawned so far that have not left the merging zone.
    pub fn vehicles_in_flight(&self) -> u64 {
        let waiting: u64 = self.entries[self.next_entry..]
            .iter()
            .filter(|e| e.desired <= self.now)
            .map(|e| e.size as u64)
            .sum();
        let active: u64 = self
            .uncommitted
            .iter()
            .chain(&self.pending)
            .chain(&self.in_zone)
            .map(|&k| self.platoons[k].platoon.size as u64)
            .sum();
        waiting + active
    }

    /// Vehicles whose desired entry time has passed.
    pub fn vehicles_spawned_so_far(&self) -> u64 {
        let future: u64 = self.entries[self.next_entry..]
            .iter()
            .filter(|e| e.desired > self.now)
            .map(|e| e.size as u64)
            .sum();
        self.spawned_vehicles - future
    }

    pub fn vehicles_exited(&self) -> u64 {
        self.exited_vehicles
    }

    /// Leader states of all platoons in the schedule or merging zone, by id.
    pub fn leader_states(&self) -> Vec<(u64, crate::platoon::VehicleState)> {
        let mut out: Vec<_> = self
            .uncommitted
            .iter()
            .chain(&self.pending)
            .chain(&self.in_zone)
            .map(|&k| (self.platoons[k].platoon.id, self.platoons[k].path.state_at(self.now)))
            .collect();
        out.sort_by_key(|(id, _)| *id);
        out
    }

    pub fn finished(&self) -> bool {
        self.next_entry == self.entries.len() && self.active_platoons() == 0
    }

    fn log_line(&mut self, t: f64, kind: &str, id: u64, payload: std::fmt::Arguments<'_>) {
        if self.record_log {
            let _ = writeln!(self.log, "{t} {kind} {id} {payload}");
        }
    }

    /// Advances to the next grid time, first processing every exact-time
    /// event up to it.
    pub fn step(&mut self) -> Result<()> {
        let t_step = (self.step_index + 1) as f64 * self.dt;
        loop {
            let arrival = self.entries.get(self.next_entry).map_or(f64::INFINITY, |e| e.t0);
            let (commit, who) = self.next_commit();
            if commit <= arrival && commit <= t_step {
                self.now = commit;
                self.commit_prefix(who.expect("finite commit time has an owner"))?;
            } else if arrival <= t_step {
                self.now = arrival;
                self.admit_arrival()?;
            } else {
                break;
            }
        }
        self.now = t_step;
        self.step_index += 1;
        self.on_grid()
    }

    fn next_commit(&self) -> (f64, Option<usize>) {
        if self.mode != Mode::Optimal {
            return (f64::INFINITY, None);
        }
        let mut best = (f64::INFINITY, None);
        for &k in &self.uncommitted {
            let t = self.platoons[k].commit_at;
            if t < best.0 {
                best = (t, Some(k));
            }
        }
        best
    }

    fn admit_arrival(&mut self) -> Result<()> {
        let e = self.entries[self.next_entry];
        self.next_entry += 1;
        let now = self.now;
        let id = self.ids.next_id();
        let route = Route::for_movement(e.movement, &self.geom)?;
        let platoon = Platoon::entering(id, e.size, route, self.headway, e.t0, e.v0)?;
        let bounds = self.config.bounds.for_route(&route, &self.geom);
        let d_star = merging_distance(&route, &self.geom)?;
        let timing = compute_passing_time(&platoon, &self.geom, &self.config.bounds)?;
        let timing = compute_deadline(&platoon, timing, &self.geom, self.config.crawl_floor)?;
        let (fastest, _, _) = earliest_arrival(e.sampled_speed, self.geom.schedule_zone_length, bounds.v_max, bounds.u_max)?;
        let free_flow = fastest + d_star / bounds.v_max;
        let path = match self.mode {
            Mode::LaneGroups => stop_line_path(e.t0, e.v0, self.geom.schedule_zone_length, bounds.brake()),
            _ => LeaderPath::new(vec![Segment::constant(e.t0, f64::INFINITY, 0.0, e.v0, 0.0)]),
        };
        let k = self.platoons.len();
        self.platoons.push(SimPlatoon {
            platoon,
            entry: e,
            bounds,
            d_star,
            path,
            deadline: e.t0 + timing.deadline,
            free_flow,
            tm: f64::NAN,
            leader_exit: f64::NAN,
            release: f64::NAN,
            commit_at: f64::INFINITY,
            committed: false,
        });
        self.log_line(
            now,
            "ARRIVE",
            id,
            format_args!("{} {} {} {} {}", e.movement, e.size, e.v0, e.desired, e.first_vehicle),
        );
        match self.mode {
            Mode::Optimal => {
                self.uncommitted.push(k);
                self.reschedule()?;
            }
            Mode::Fcfs(fcfs) => {
                let cand = candidate_for(&self.platoons[k].platoon, &self.config)?;
                let tm = fcfs_entry(&cand, now, &self.exits, fcfs);
                self.replan(k, tm)?;
                self.platoons[k].release = tm + cand.timing.crossing_time;
                self.commit(k)?;
            }
            Mode::LaneGroups => {
                self.uncommitted.push(k);
                self.log_path(k);
            }
        }
        Ok(())
    }

    /// Recomputes the optimal schedule over uncommitted platoons at `now`.
    fn reschedule(&mut self) -> Result<()> {
        if self.uncommitted.is_empty() {
            return Ok(());
        }
        let now = self.now;
        let s = self.geom.schedule_zone_length;
        let mut candidates = Vec::with_capacity(self.uncommitted.len());
        for &k in &self.uncommitted {
            let p = &mut self.platoons[k];
            let st = p.path.state_at(now);
            p.platoon.leader_state = crate::platoon::VehicleState::new(
                st.position.min(s),
                st.velocity.clamp(0.0, p.bounds.v_max),
                st.control,
            );
            candidates.push(candidate_for(&p.platoon, &self.config)?);
        }
        let schedule = schedule_candidates(&candidates, now, &self.exits, &self.config)?;
        let order = self.uncommitted.clone();
        for k in order {
            let id = self.platoons[k].platoon.id;
            let tm = schedule.entry_times[&id];
            let old = self.platoons[k].tm;
            if old.is_nan() || (tm - old).abs() > REPLAN_EPS {
                self.replan(k, tm)?;
            }
            self.platoons[k].release = schedule.exit_times[&id];
        }
        Ok(())
    }

    /// Plans the leader from its state at `now` to reach the merging zone at
    /// `tm` with the route speed limit, then cruise through it.
    fn replan(&mut self, k: usize, tm: f64) -> Result<()> {
        let now = self.now;
        let s = self.geom.schedule_zone_length;
        let p = &mut self.platoons[k];
        let st = p.path.state_at(now);
        let traj = plan(now, st.position.min(s), st.velocity.clamp(0.0, p.bounds.v_max), tm, s, &p.bounds)?;
        let report = feasibility_check(&traj, &p.bounds);
        if let Some(v) = report.violation {
            return Err(Error::InfeasibleSchedule(format!(
                "plan for platoon {} breaks a bound at t={}: {:?} {} vs {}",
                p.platoon.id, v.time, v.quantity, v.value, v.limit
            )));
        }
        if traj.kind == TrajectoryKind::StopWait {
            self.stop_wait_plans += 1;
        }
        let t_end = traj.t_end;
        let v_t = p.bounds.v_max;
        let tail = Segment::constant(t_end, f64::INFINITY, s, v_t, 0.0);
        p.path.replace_from(now, traj.segments.into_iter().chain([tail]));
        p.tm = t_end;
        p.leader_exit = t_end + p.d_star / v_t;
        p.commit_at = if self.mode == Mode::Optimal {
            commit_time(&p.path, now, t_end, s, v_t, &p.bounds)
        } else {
            f64::INFINITY
        };
        let id = p.platoon.id;
        let kind = traj.kind;
        self.log_line(now, "PLAN", id, format_args!("{t_end} {kind:?}"));
        self.log_path(k);
        Ok(())
    }

    fn log_path(&mut self, k: usize) {
        if self.record_log {
            let line = format_path(self.platoons[k].path.segments());
            let id = self.platoons[k].platoon.id;
            self.log_line(self.now, "PATH", id, format_args!("{line}"));
        }
    }

    /// Commits the platoon that reached its point of no return together
    /// with every uncommitted platoon scheduled to enter no later than it.
    fn commit_prefix(&mut self, k: usize) -> Result<()> {
        let limit = self.platoons[k].tm + REPLAN_EPS;
        let mut chosen: Vec<usize> = self
            .uncommitted
            .iter()
            .copied()
            .filter(|&j| self.platoons[j].tm <= limit)
            .collect();
        chosen.sort_by(|&a, &b| {
            self.platoons[a]
                .tm
                .total_cmp(&self.platoons[b].tm)
                .then(self.platoons[a].platoon.id.cmp(&self.platoons[b].platoon.id))
        });
        self.uncommitted.retain(|j| !chosen.contains(j));
        for j in chosen {
            self.commit(j)?;
        }
        self.reschedule()
    }

    /// Fixes a platoon's merging-zone occupancy and checks it against every
    /// committed conflicting occupancy.
    fn commit(&mut self, k: usize) -> Result<()> {
        let now = self.now;
        self.recent.retain(|&j| self.platoons[j].release > now - 1.0);
        let p = &self.platoons[k];
        for &j in &self.recent {
            let q = &self.platoons[j];
            if !self
                .config
                .conflicts
                .conflict_by_index(p.movement().index(), q.movement().index())
            {
                continue;
            }
            if p.tm < q.release - SAFETY_EPS && q.tm < p.release - SAFETY_EPS {
                return Err(Error::SafetyViolation {
                    time: now,
                    report: format!(
                        "occupancy of platoon {} ({}) on [{}, {}] overlaps platoon {} ({}) on [{}, {}]",
                        p.platoon.id,
                        p.movement(),
                        p.tm,
                        p.release,
                        q.platoon.id,
                        q.movement(),
                        q.tm,
                        q.release
                    ),
                });
            }
        }
        let (movement, release, tm, id) = (p.movement(), p.release, p.tm, p.platoon.id);
        self.max_lateness = self.max_lateness.max(release - p.deadline);
        self.exits.record(movement, release);
        let p = &mut self.platoons[k];
        p.committed = true;
        p.commit_at = f64::INFINITY;
        p.platoon.assign_entry(tm)?;
        self.recent.push(k);
        self.pending.push(k);
        self.log_line(now, "COMMIT", id, format_args!("{tm} {release}"));
        Ok(())
    }

    fn on_grid(&mut self) -> Result<()> {
        let now = self.now;
        let mut k = 0;
        while k < self.pending.len() {
            let j = self.pending[k];
            if self.platoons[j].tm <= now {
                self.pending.swap_remove(k);
                self.platoons[j].platoon.advance_phase(PlatoonPhase::InMergingZone)?;
                self.in_zone.push(j);
                let (id, tm) = (self.platoons[j].platoon.id, self.platoons[j].tm);
                self.log_line(now, "ENTER", id, format_args!("{tm}"));
            } else {
                k += 1;
            }
        }
        self.in_zone.sort_unstable();
        self.monitor()?;
        let mut k = 0;
        while k < self.in_zone.len() {
            let j = self.in_zone[k];
            if self.platoons[j].tail_exit() <= now {
                self.in_zone.remove(k);
                self.finalize(j)?;
            } else {
                k += 1;
            }
        }
        if self.mode == Mode::LaneGroups {
            self.lane_group_step()?;
        }
        if self.mode == Mode::Optimal && self.cadence == Cadence::EveryStep {
            self.reschedule()?;
        }
        Ok(())
    }

    /// Every vehicle strictly inside the merging zone must be compatible
    /// with every vehicle of another platoon inside it.
    fn monitor(&self) -> Result<()> {
        let s = self.geom.schedule_zone_length;
        let mut inside: Vec<(usize, u32, f64)> = Vec::new();
        for &j in &self.in_zone {
            let p = &self.platoons[j];
            for i in 0..p.platoon.size {
                let x = p.path.state_at(self.now - p.platoon.member_offset(i)).position;
                if x > s + 1e-9 && x < s + p.d_star - 1e-9 {
                    inside.push((j, i, x));
                }
            }
        }
        for (a, &(ja, ia, xa)) in inside.iter().enumerate() {
            for &(jb, ib, xb) in &inside[a + 1..] {
                if ja == jb {
                    continue;
                }
                let (pa, pb) = (&self.platoons[ja], &self.platoons[jb]);
                if self
                    .config
                    .conflicts
                    .conflict_by_index(pa.movement().index(), pb.movement().index())
                {
                    return Err(Error::SafetyViolation {
                        time: self.now,
                        report: format!(
                            "vehicle {} of platoon {} ({}) at {xa:.3} m and vehicle {} of platoon {} ({}) at {xb:.3} m \
                             share the merging zone; in zone: {}",
                            ia,
                            pa.platoon.id,
                            pa.movement(),
                            ib,
                            pb.platoon.id,
                            pb.movement(),
                            self.dump_in_zone()
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    fn dump_in_zone(&self) -> String {
        self.in_zone
            .iter()
            .map(|&j| {
                let p = &self.platoons[j];
                format!(
                    "[id {} {} n={} tm={} exit={} release={}]",
                    p.platoon.id,
                    p.movement(),
                    p.platoon.size,
                    p.tm,
                    p.leader_exit,
                    p.release
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn finalize(&mut self, k: usize) -> Result<()> {
        let p = &mut self.platoons[k];
        p.platoon.set_exit(p.leader_exit)?;
        p.platoon.advance_phase(PlatoonPhase::Exited)?;
        let p = &self.platoons[k];
        let wait = p.entry.t0 - p.entry.desired;
        let fuel = path_fuel(&p.path, p.entry.t0, p.leader_exit, self.dt, &self.fuel) + self.fuel.c0 * wait;
        let travel = p.leader_exit - p.entry.desired;
        for i in 0..p.platoon.size {
            let offset = p.platoon.member_offset(i);
            let exit_time = p.leader_exit + offset;
            if exit_time <= self.horizon {
                self.exited_by_horizon += 1;
            }
            self.records.push(VehicleRecord {
                vehicle_id: p.entry.first_vehicle + i as u64,
                platoon_id: p.platoon.id,
                index: i,
                approach: p.movement().approach,
                movement: p.movement(),
                entry_time: p.entry.desired + offset,
                exit_time,
                travel_time: travel,
                delay: travel - p.free_flow,
                fuel,
            });
        }
        self.exited_vehicles += p.platoon.size as u64;
        let (id, le, te) = (p.platoon.id, p.leader_exit, p.tail_exit());
        self.log_line(self.now, "EXIT", id, format_args!("{le} {te}"));
        Ok(())
    }

    fn lane_group_step(&mut self) -> Result<()> {
        let now = self.now;
        let mut lanes = self.lanes.take().expect("lane-group state");
        if now >= lanes.next_boundary - 1e-9 {
            let mut queues = [0u32; Movement::COUNT];
            for &k in &self.uncommitted {
                let p = &self.platoons[k];
                queues[p.movement().index()] += p.platoon.size;
            }
            lanes.selected = lqf_mwm_controller(&queues, &mut lanes.groups);
            lanes.interval_end = lanes.next_boundary + self.lqf_interval;
            lanes.next_boundary += self.lqf_interval;
            if self.record_log {
                let weights: Vec<String> = lanes.groups.iter().map(|g| g.weight.to_string()).collect();
                let sel = lanes.selected.map_or("-".to_string(), |g| g.to_string());
                self.log_line(now, "PHASE", 0, format_args!("{sel} {}", weights.join(",")));
            }
        }
        let result = match lanes.selected {
            Some(g) => {
                let movements = lanes.groups[g].movements.clone();
                self.admit_lane_heads(&movements, lanes.interval_end)
            }
            None => Ok(()),
        };
        self.lanes = Some(lanes);
        result
    }

    /// Releases the first waiting platoon of each lane in the selected group
    /// when it can reach the merging zone before the interval ends and every
    /// conflicting occupancy has cleared by then.
    fn admit_lane_heads(&mut self, movements: &[Movement], interval_end: f64) -> Result<()> {
        let now = self.now;
        let s = self.geom.schedule_zone_length;
        for &m in movements {
            let Some(pos) = self.uncommitted.iter().position(|&k| self.platoons[k].movement() == m) else {
                continue;
            };
            let k = self.uncommitted[pos];
            let p = &self.platoons[k];
            let st = p.path.state_at(now);
            let (segments, entry) = fastest_approach(now, st.position.min(s), st.velocity.max(0.0), s, &p.bounds);
            if entry >= interval_end || self.exits.release_for(m) > entry {
                continue;
            }
            self.uncommitted.remove(pos);
            let p = &mut self.platoons[k];
            p.path.replace_from(now, segments);
            p.tm = entry;
            p.leader_exit = p
                .path
                .time_at_position(s + p.d_star)
                .expect("an accelerating leader reaches the zone exit");
            p.release = p.tail_exit() + self.geom.clearance_time;
            self.log_path(k);
            self.commit(k)?;
        }
        Ok(())
    }

    pub fn run_to_end(mut self) -> Result<RunResult> {
        let limit = self.horizon + self.drain_limit;
        while !self.finished() && self.now < limit {
            self.step()?;
        }
        Ok(self.into_result())
    }

    fn into_result(mut self) -> RunResult {
        self.records.sort_by_key(|r| r.vehicle_id);
        let n = self.records.len() as f64;
        let mean = |f: fn(&VehicleRecord) -> f64| {
            if n > 0.0 {
                self.records.iter().map(f).sum::<f64>() / n
            } else {
                0.0
            }
        };
        let total_fuel: f64 = self.records.iter().map(|r| r.fuel).sum();
        let in_flight_at_end = self.spawned_vehicles - self.exited_vehicles;
        let summary = Summary {
            controller: self.kind,
            seed: self.seed,
            max_platoon_size: self.max_platoon_size,
            horizon: self.horizon,
            spawned_vehicles: self.spawned_vehicles,
            exited_vehicles: self.exited_vehicles,
            exited_by_horizon: self.exited_by_horizon,
            in_flight_at_horizon: self.spawned_vehicles - self.exited_by_horizon,
            in_flight_at_end,
            platoons: self.platoons.len() as u64,
            average_travel_time: mean(|r| r.travel_time),
            average_delay: mean(|r| r.delay),
            total_fuel,
            average_fuel: if n > 0.0 { total_fuel / n } else { 0.0 },
            throughput: self.exited_vehicles,
            max_lateness: if self.max_lateness.is_finite() { self.max_lateness } else { 0.0 },
            stop_wait_plans: self.stop_wait_plans,
            end_time: self.now,
        };
        RunResult {
            summary,
            vehicles: self.records,
            log: self.log,
        }
    }
}

/// Cruise at `v0`, then brake to a standstill exactly at the stop line.
fn stop_line_path(t0: f64, v0: f64, s: f64, brake: f64) -> LeaderPath {
    let d_brake = v0 * v0 / (2.0 * brake);
    let t_cruise = (s - d_brake).max(0.0) / v0.max(1e-12);
    let t_brake = t0 + t_cruise;
    let t_stop = t_brake + v0 / brake;
    LeaderPath::new(vec![
        Segment::constant(t0, t_brake, 0.0, v0, 0.0),
        Segment::constant(t_brake, t_stop, s - d_brake, v0, -brake),
        Segment::constant(t_stop, f64::INFINITY, s, 0.0, 0.0),
    ])
}

/// Full acceleration towards the speed limit from `(p, v)`, continuing into
/// the merging zone if the limit is not reached before it. Returns the
/// segments and the merging-zone entry time.
fn fastest_approach(now: f64, p: f64, v: f64, s: f64, bounds: &ControlBounds) -> (Vec<Segment>, f64) {
    let (v_t, u) = (bounds.v_max, bounds.u_max);
    let dist = s - p;
    if v >= v_t - 1e-12 {
        let seg = Segment::constant(now, f64::INFINITY, p, v_t, 0.0);
        return (vec![seg], now + dist / v_t);
    }
    let t_acc = (v_t - v) / u;
    let d_acc = (v_t * v_t - v * v) / (2.0 * u);
    let entry = if d_acc <= dist {
        now + t_acc + (dist - d_acc) / v_t
    } else {
        now + ((v * v + 2.0 * u * dist).sqrt() - v) / u
    };
    let segs = vec![
        Segment::constant(now, now + t_acc, p, v, u),
        Segment::constant(now + t_acc, f64::INFINITY, p + d_acc, v_t, 0.0),
    ];
    (segs, entry)
}

/// First time on `[from, to]` at which the leader comes within
/// [`COMMIT_MARGIN`] of being unable to stop and relaunch to the speed
/// limit before the merging zone. The stopping
/// reach `p + v²/(2|u_min|)` never decreases while `u >= u_min`, so the
/// crossing is found by bisection.
fn commit_time(path: &LeaderPath, from: f64, to: f64, s: f64, v_t: f64, bounds: &ControlBounds) -> f64 {
    let threshold = s - v_t * v_t / (2.0 * bounds.u_max) - COMMIT_MARGIN;
    let reach = |t: f64| {
        let st = path.state_at(t);
        st.position + st.velocity * st.velocity / (2.0 * bounds.brake())
    };
    if reach(from) >= threshold {
        return from;
    }
    let (mut lo, mut hi) = (from, to);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reach(mid) >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Runs a scenario to completion.
pub fn run(spec: &ScenarioSpec) -> Result<RunResult> {
    World::new(spec)?.run_to_end()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Approach, Turn};

    #[test]
    fn gating_spaces_platoons_in_a_lane() {
        let m = Movement::new(Approach::North, Turn::Straight);
        let arrivals = [
            Arrival {
                time: 0.0,
                movement: m,
                size: 3,
                speed: 12.0,
            },
            Arrival {
                time: 1.0,
                movement: m,
                size: 1,
                speed: 15.0,
            },
        ];
        let e = plan_entries(&arrivals, u32::MAX, 1.2);
        assert_eq!(e.len(), 2);
        assert!((e[1].t0 - 3.6).abs() < 1e-12);
        assert_eq!(e[1].v0, 12.0);
        assert_eq!(e[1].first_vehicle, 4);

        let split = plan_entries(&arrivals, 1, 1.2);
        let t0: Vec<f64> = split.iter().map(|e| e.t0).collect();
        assert_eq!(split.len(), 4);
        assert!((t0[1] - 1.2).abs() < 1e-12 && (t0[2] - 2.4).abs() < 1e-12 && (t0[3] - 3.6).abs() < 1e-12);
    }

    #[test]
    fn stop_line_path_halts_at_the_line() {
        let p = stop_line_path(0.0, 12.0, 200.0, 3.0);
        let end = p.state_at(1e5);
        assert_eq!(end.position, 200.0);
        assert_eq!(end.velocity, 0.0);
        assert!((p.state_at(p.segments()[1].t_f).position - 200.0).abs() < 1e-9);
    }

    #[test]
    fn fastest_approach_may_enter_below_the_limit() {
        let b = ControlBounds::default();
        let (segs, entry) = fastest_approach(10.0, 200.0, 0.0, 200.0, &b);
        assert_eq!(entry, 10.0);
        let path = LeaderPath::new(segs);
        let exit = path.time_at_position(250.0).unwrap();
        assert!(exit > 10.0 + 50.0 / 18.0);
        let (_, entry) = fastest_approach(0.0, 0.0, 18.0, 200.0, &b);
        assert!((entry - 200.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn commit_time_is_where_stopping_stops_being_possible() {
        let b = ControlBounds::default();
        let path = LeaderPath::new(vec![Segment::constant(0.0, f64::INFINITY, 0.0, 18.0, 0.0)]);
        let t = commit_time(&path, 0.0, 200.0 / 18.0, 200.0, 18.0, &b);
        // reach = 18 t + 54 crosses 200 - 54 - margin.
        assert!((t - (92.0 - COMMIT_MARGIN) / 18.0).abs() < 1e-9);
    }
}
