//! Partitioning platoons into compatible groups and ordering them by deadline.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::clique::{enumerate_maximal_cliques, CompatibilityGraph};
use super::timing::PlatoonTiming;
use crate::error::Result;
use crate::geometry::Movement;
use crate::platoon::PlatoonId;

/// A platoon as seen by the scheduler. `timing.arrival_time_min` and
/// `timing.passing_time` are relative to the scheduling instant, while
/// `timing.deadline` is relative to `entry_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: PlatoonId,
    pub movement: Movement,
    pub entry_time: f64,
    pub timing: PlatoonTiming,
}

impl Candidate {
    pub fn absolute_deadline(&self) -> f64 {
        self.entry_time + self.timing.deadline
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub members: Vec<Candidate>,
    /// Latest absolute member deadline.
    pub group_deadline: f64,
    pub group_passing: f64,
    pub group_crossing: f64,
}

impl Group {
    pub fn new(members: Vec<Candidate>) -> Self {
        let fold = |f: fn(&Candidate) -> f64| members.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let group_deadline = fold(Candidate::absolute_deadline);
        let group_passing = fold(|c| c.timing.passing_time);
        let group_crossing = fold(|c| c.timing.crossing_time);
        Group {
            members,
            group_deadline,
            group_passing,
            group_crossing,
        }
    }

    pub fn ids(&self) -> Vec<PlatoonId> {
        self.members.iter().map(|c| c.id).collect()
    }

    pub fn earliest_entry(&self) -> f64 {
        self.members.iter().map(|c| c.entry_time).fold(f64::INFINITY, f64::min)
    }

    pub fn lowest_id(&self) -> PlatoonId {
        self.members.iter().map(|c| c.id).min().unwrap_or(PlatoonId::MAX)
    }

    pub fn contains(&self, id: PlatoonId) -> bool {
        self.members.iter().any(|c| c.id == id)
    }
}

/// Partitions `candidates` into groups of mutually compatible platoons.
///
/// Maximal cliques can overlap, so they are committed greedily: largest
/// first, then earliest deadline, then lexicographically smallest vertex
/// list. Committed platoons are removed from the remaining cliques.
pub fn build_groups(candidates: &[Candidate], graph: &CompatibilityGraph, cap: usize) -> Result<Vec<Group>> {
    debug_assert_eq!(candidates.len(), graph.len());
    let mut cliques = enumerate_maximal_cliques(graph, cap)?;
    let mut groups = Vec::new();
    let deadline_of = |c: &[usize]| {
        c.iter()
            .map(|&v| candidates[v].absolute_deadline())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    while !cliques.is_empty() {
        let best = (0..cliques.len())
            .min_by(|&a, &b| {
                let (ca, cb) = (&cliques[a], &cliques[b]);
                cb.len()
                    .cmp(&ca.len())
                    .then_with(|| deadline_of(ca).total_cmp(&deadline_of(cb)))
                    .then_with(|| ca.cmp(cb))
            })
            .expect("cliques is non-empty");
        let chosen = cliques.swap_remove(best);
        for c in &mut cliques {
            c.retain(|v| !chosen.contains(v));
        }
        cliques.retain(|c| !c.is_empty());
        groups.push(Group::new(chosen.iter().map(|&v| candidates[v]).collect()));
    }
    Ok(groups)
}

fn edd_order(a: &Group, b: &Group) -> Ordering {
    a.group_deadline
        .total_cmp(&b.group_deadline)
        .then_with(|| a.earliest_entry().total_cmp(&b.earliest_entry()))
        .then_with(|| a.lowest_id().cmp(&b.lowest_id()))
}

/// Sorts groups by non-decreasing deadline; ties go to the group whose
/// earliest member entered first, then to the lowest platoon id.
pub fn edd_sequence(mut groups: Vec<Group>) -> Vec<Group> {
    groups.sort_by(edd_order);
    groups
}

/// EDD order subject to lane precedence: a platoon may not be sequenced
/// before an earlier platoon on the same movement. Each pick takes the
/// first group in EDD order holding an eligible member; ineligible members
/// are split off and stay behind. Without same-movement pairs this is
/// exactly [`edd_sequence`].
pub fn edd_sequence_lane_ordered(groups: Vec<Group>) -> Vec<Group> {
    let mut pending = edd_sequence(groups);
    let mut out = Vec::with_capacity(pending.len());
    while !pending.is_empty() {
        let eligible = |c: &Candidate, pending: &[Group]| {
            pending.iter().flat_map(|g| &g.members).all(|o| {
                o.movement != c.movement || (o.entry_time, o.id) >= (c.entry_time, c.id)
            })
        };
        let k = pending
            .iter()
            .position(|g| g.members.iter().any(|c| eligible(c, &pending)))
            .expect("the earliest remaining platoon is always eligible");
        let (ready, waiting): (Vec<Candidate>, Vec<Candidate>) =
            pending[k].members.iter().partition(|c| eligible(c, &pending));
        if waiting.is_empty() {
            out.push(pending.remove(k));
        } else {
            pending[k] = Group::new(waiting);
            out.push(Group::new(ready));
            pending.sort_by(edd_order);
        }
    }
    out
}
