use serde::{Deserialize, Serialize};

use crate::scheduler::{Candidate, CommittedExits, EntryRelease, Group, Schedule};

/// Whether compatible platoons may share the merging zone under FCFS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FcfsMode {
    /// Each platoon waits only for earlier conflicting platoons.
    #[default]
    ConflictGated,
    /// Each platoon waits for every earlier platoon.
    Serial,
}

/// Entry time of the next platoon in arrival order.
pub fn fcfs_entry(candidate: &Candidate, now: f64, exits: &CommittedExits, mode: FcfsMode) -> f64 {
    let release = match mode {
        FcfsMode::ConflictGated => exits.release_for(candidate.movement),
        FcfsMode::Serial => exits.completion(),
    };
    (now + candidate.timing.arrival_time_min).max(release)
}

/// Schedules `candidates` one at a time in order of schedule-zone entry
/// (ties by id). Every platoon forms its own group.
pub fn fcfs_schedule(candidates: &[Candidate], now: f64, committed: &CommittedExits, mode: FcfsMode) -> Schedule {
    let mut order: Vec<Candidate> = candidates.to_vec();
    order.sort_by(|a, b| a.entry_time.total_cmp(&b.entry_time).then(a.id.cmp(&b.id)));
    let mut exits = committed.clone();
    let mut schedule = Schedule::empty(committed.completion());
    for c in order {
        let tm = fcfs_entry(&c, now, &exits, mode);
        let exit = tm + c.timing.crossing_time;
        exits.record(c.movement, exit);
        schedule.entry_times.insert(c.id, tm);
        schedule.exit_times.insert(c.id, exit);
        schedule.group_exits.push(exit);
        schedule.ordered_groups.push(Group::new(vec![c]));
        schedule.completion_time = schedule.completion_time.max(exit);
    }
    schedule
}
