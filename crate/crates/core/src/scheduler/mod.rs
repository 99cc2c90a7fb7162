//! Upper-level scheduling: timings, compatible groups, EDD order and entry times.

pub mod clique;
pub mod entry;
pub mod groups;
pub mod timing;

pub use clique::{enumerate_maximal_cliques, CompatibilityGraph, DEFAULT_VERTEX_CAP};
pub use entry::{assign_entry_times, CommittedExits, EntryRelease, Schedule, UniformRelease};
pub use groups::{build_groups, edd_sequence, edd_sequence_lane_ordered, Candidate, Group};
pub use timing::{
    compute_deadline, compute_passing_time, crossing_time, earliest_arrival, lateness, PlatoonTiming,
};

use crate::error::{Error, Result};
use crate::geometry::{IntersectionGeometry, MovementConflictTable};
use crate::platoon::{ControlBounds, Platoon, PlatoonPhase};

#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerConfig {
    pub geometry: IntersectionGeometry,
    pub conflicts: MovementConflictTable,
    pub bounds: ControlBounds,
    /// Lowest speed used in the deadline of a slow or stopped arrival.
    pub crawl_floor: f64,
    pub clique_cap: usize,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            geometry: IntersectionGeometry::default(),
            conflicts: MovementConflictTable::four_leg_default(),
            bounds: ControlBounds::default(),
            crawl_floor: 0.5,
            clique_cap: DEFAULT_VERTEX_CAP,
        }
    }
}

/// Full timing of `platoon` from its current leader state.
pub fn timing_for(platoon: &Platoon, config: &SchedulerConfig) -> Result<PlatoonTiming> {
    let t = compute_passing_time(platoon, &config.geometry, &config.bounds)?;
    compute_deadline(platoon, t, &config.geometry, config.crawl_floor)
}

pub fn candidate_for(platoon: &Platoon, config: &SchedulerConfig) -> Result<Candidate> {
    Ok(Candidate {
        id: platoon.id,
        movement: platoon.route.movement(),
        entry_time: platoon.entry_time,
        timing: timing_for(platoon, config)?,
    })
}

/// Groups, sequences and times `candidates` at instant `now`.
pub fn schedule_candidates(
    candidates: &[Candidate],
    now: f64,
    release: &impl EntryRelease,
    config: &SchedulerConfig,
) -> Result<Schedule> {
    let labelled: Vec<_> = candidates.iter().map(|c| (c.id, c.movement)).collect();
    let graph = CompatibilityGraph::from_movements(&labelled, &config.conflicts)?;
    let groups = build_groups(candidates, &graph, config.clique_cap)?;
    Ok(assign_entry_times(edd_sequence_lane_ordered(groups), now, release))
}

/// Recomputes the schedule of every platoon still in the schedule zone after
/// `new_platoon` arrives. Platoons already committed to the merging zone are
/// represented only through `release`.
pub fn reschedule_on_arrival(
    active: &[Platoon],
    new_platoon: &Platoon,
    release: &impl EntryRelease,
    now: f64,
    config: &SchedulerConfig,
) -> Result<Schedule> {
    if new_platoon.phase != PlatoonPhase::InScheduleZone {
        return Err(Error::InfeasibleState(format!(
            "platoon {} is not in the schedule zone",
            new_platoon.id
        )));
    }
    let mut candidates = Vec::with_capacity(active.len() + 1);
    for p in active.iter().filter(|p| p.phase == PlatoonPhase::InScheduleZone) {
        if p.id != new_platoon.id {
            candidates.push(candidate_for(p, config)?);
        }
    }
    candidates.push(candidate_for(new_platoon, config)?);
    schedule_candidates(&candidates, now, release, config)
}
