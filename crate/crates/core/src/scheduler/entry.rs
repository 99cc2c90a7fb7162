//! Merging-zone entry times for a sequence of groups.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::groups::Group;
use crate::geometry::{Movement, MovementConflictTable};
use crate::platoon::PlatoonId;

/// Earliest instant a platoon on a given movement may enter the merging
/// zone because of platoons already committed to it.
pub trait EntryRelease {
    fn release_for(&self, movement: Movement) -> f64;
}

/// One completion time `t_G_f` shared by every movement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformRelease(pub f64);

impl EntryRelease for UniformRelease {
    fn release_for(&self, _movement: Movement) -> f64 {
        self.0
    }
}

/// Last committed exit (including clearance) per movement. A movement is
/// released once every conflicting movement's last committed platoon is out.
#[derive(Debug, Clone, PartialEq)]
pub struct CommittedExits {
    table: MovementConflictTable,
    last_exit: [f64; Movement::COUNT],
}

impl CommittedExits {
    pub fn new(table: MovementConflictTable) -> Self {
        CommittedExits {
            table,
            last_exit: [f64::NEG_INFINITY; Movement::COUNT],
        }
    }

    /// Records a committed exit; earlier values never replace later ones.
    pub fn record(&mut self, movement: Movement, exit: f64) {
        let slot = &mut self.last_exit[movement.index()];
        *slot = slot.max(exit);
    }

    pub fn last_exit(&self, movement: Movement) -> f64 {
        self.last_exit[movement.index()]
    }

    /// Latest committed exit over all movements.
    pub fn completion(&self) -> f64 {
        self.last_exit.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl EntryRelease for CommittedExits {
    fn release_for(&self, movement: Movement) -> f64 {
        let m = movement.index();
        (0..Movement::COUNT)
            .filter(|&k| self.table.conflict_by_index(m, k))
            .map(|k| self.last_exit[k])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub ordered_groups: Vec<Group>,
    pub entry_times: BTreeMap<PlatoonId, f64>,
    /// Per-platoon `tm + t_c*`.
    pub exit_times: BTreeMap<PlatoonId, f64>,
    pub group_exits: Vec<f64>,
    pub completion_time: f64,
}

impl Schedule {
    pub fn empty(completion_time: f64) -> Self {
        Schedule {
            ordered_groups: Vec::new(),
            entry_times: BTreeMap::new(),
            exit_times: BTreeMap::new(),
            group_exits: Vec::new(),
            completion_time,
        }
    }

    pub fn entry_of(&self, id: PlatoonId) -> Option<f64> {
        self.entry_times.get(&id).copied()
    }

    pub fn group_index_of(&self, id: PlatoonId) -> Option<usize> {
        self.ordered_groups.iter().position(|g| g.contains(id))
    }

    /// Max over groups of `group exit - group deadline`.
    pub fn max_lateness(&self) -> f64 {
        self.ordered_groups
            .iter()
            .zip(&self.group_exits)
            .map(|(g, e)| e - g.group_deadline)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// One line per platoon: `id t0 deadline tm exit group`, in sequence order.
    pub fn log_lines(&self) -> String {
        let mut out = String::new();
        for (k, g) in self.ordered_groups.iter().enumerate() {
            for c in &g.members {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} {}",
                    c.id,
                    c.entry_time,
                    c.absolute_deadline(),
                    self.entry_times[&c.id],
                    self.exit_times[&c.id],
                    k
                );
            }
        }
        out
    }
}

/// Assigns entry times along `sequence`. Each member enters at the latest of
/// its own earliest arrival, its movement's release, and the previous
/// group's exit; a group exits when its last member clears the zone.
///
/// With a uniform release this is the classic chaining: the first group
/// enters at `now + t_a*` (or at `t_G_f` if that is later) and every later
/// group enters when its predecessor exits.
pub fn assign_entry_times(sequence: Vec<Group>, now: f64, release: &impl EntryRelease) -> Schedule {
    let mut schedule = Schedule::empty(f64::NEG_INFINITY);
    let mut previous_exit = f64::NEG_INFINITY;
    for group in &sequence {
        let mut group_exit = f64::NEG_INFINITY;
        for c in &group.members {
            let tm = (now + c.timing.arrival_time_min)
                .max(release.release_for(c.movement))
                .max(previous_exit);
            let exit = tm + c.timing.crossing_time;
            schedule.entry_times.insert(c.id, tm);
            schedule.exit_times.insert(c.id, exit);
            group_exit = group_exit.max(exit);
        }
        schedule.group_exits.push(group_exit);
        previous_exit = group_exit;
    }
    schedule.completion_time = previous_exit;
    schedule.ordered_groups = sequence;
    schedule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Approach, Turn};
    use crate::scheduler::groups::Candidate;
    use crate::scheduler::timing::PlatoonTiming;

    fn member(id: PlatoonId, movement: Movement, arrival: f64, crossing: f64) -> Candidate {
        Candidate {
            id,
            movement,
            entry_time: 0.0,
            timing: PlatoonTiming {
                arrival_time_min: arrival,
                crossing_time: crossing,
                passing_time: arrival + crossing,
                deadline: arrival + crossing,
                ..Default::default()
            },
        }
    }

    fn ns() -> Movement {
        Movement::new(Approach::North, Turn::Straight)
    }

    #[test]
    fn single_group_without_backlog() {
        let g = Group::new(vec![member(1, ns(), 11.1, 3.8)]);
        let s = assign_entry_times(vec![g], 100.0, &UniformRelease(0.0));
        assert!((s.entry_of(1).unwrap() - 111.1).abs() < 1e-12);
        assert!((s.completion_time - 114.9).abs() < 1e-9);
    }

    #[test]
    fn single_group_behind_backlog() {
        let g = Group::new(vec![member(1, ns(), 11.1, 3.8), member(2, ns(), 9.0, 4.5)]);
        let s = assign_entry_times(vec![g], 100.0, &UniformRelease(130.0));
        assert_eq!(s.entry_of(1), Some(130.0));
        assert_eq!(s.entry_of(2), Some(130.0));
        assert_eq!(s.completion_time, 134.5);
    }

    #[test]
    fn groups_chain_on_exits() {
        let seq = vec![
            Group::new(vec![member(1, ns(), 5.0, 3.0)]),
            Group::new(vec![member(2, ns(), 1.0, 4.0)]),
            Group::new(vec![member(3, ns(), 2.0, 2.0)]),
        ];
        let s = assign_entry_times(seq, 0.0, &UniformRelease(0.0));
        assert_eq!(s.group_exits, vec![8.0, 12.0, 14.0]);
        assert_eq!(s.entry_of(2), Some(8.0));
        assert_eq!(s.entry_of(3), Some(12.0));
    }

    #[test]
    fn later_group_never_enters_before_its_earliest_arrival() {
        let seq = vec![
            Group::new(vec![member(1, ns(), 1.0, 1.0)]),
            Group::new(vec![member(2, ns(), 10.0, 1.0)]),
        ];
        let s = assign_entry_times(seq, 0.0, &UniformRelease(0.0));
        assert_eq!(s.entry_of(2), Some(10.0));
    }

    #[test]
    fn committed_exits_only_block_conflicting_movements() {
        let table = MovementConflictTable::four_leg_default();
        let mut exits = CommittedExits::new(table);
        exits.record(ns(), 50.0);
        exits.record(ns(), 40.0);
        assert_eq!(exits.last_exit(ns()), 50.0);
        assert_eq!(exits.release_for(ns()), 50.0);
        assert_eq!(exits.release_for(Movement::new(Approach::South, Turn::Straight)), f64::NEG_INFINITY);
        assert_eq!(exits.release_for(Movement::new(Approach::East, Turn::Straight)), 50.0);
        assert_eq!(exits.completion(), 50.0);
    }

    #[test]
    fn log_has_one_line_per_platoon() {
        let seq = vec![Group::new(vec![member(1, ns(), 5.0, 3.0), member(2, ns(), 4.0, 3.0)])];
        let s = assign_entry_times(seq, 0.0, &UniformRelease(0.0));
        let log = s.log_lines();
        assert_eq!(log.lines().count(), 2);
        assert!(log.starts_with("1 0 8 5 8 0"));
    }
}
