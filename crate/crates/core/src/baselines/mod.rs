//! Reference controllers: first-come-first-served sequencing, per-vehicle
//! splitting of platoons, and the max-weight lane-group controller.

mod fcfs;
mod lqf;

pub use fcfs::{fcfs_entry, fcfs_schedule, FcfsMode};
pub use lqf::{lane_groups, lqf_mwm_controller, select_max_weight, LaneGroup};

use crate::platoon::{IdAllocator, Platoon};

/// Splits an `n`-vehicle platoon into chunks of at most `max_size`; each
/// entry is `(index of the chunk's first vehicle, chunk size)`.
pub fn split_sizes(n: u32, max_size: u32) -> Vec<(u32, u32)> {
    let k = max_size.max(1);
    (0..n).step_by(k as usize).map(|first| (first, k.min(n - first))).collect()
}

/// Replaces every platoon with platoons of at most `max_size` vehicles on
/// the same route. A chunk starting at member `i` enters `i·t_h` after the
/// original leader. New ids are drawn from `ids` in output order.
pub fn split_platoons(platoons: &[Platoon], max_size: u32, ids: &mut IdAllocator) -> Vec<Platoon> {
    let mut out = Vec::new();
    for p in platoons {
        for (first, size) in split_sizes(p.size, max_size) {
            let mut q = p.clone();
            q.id = ids.next_id();
            q.size = size;
            q.entry_time = p.entry_time + p.member_offset(first);
            out.push(q);
        }
    }
    out
}

/// Every platoon becomes single vehicles staggered by its headway.
pub fn individualize(platoons: &[Platoon], ids: &mut IdAllocator) -> Vec<Platoon> {
    split_platoons(platoons, 1, ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Approach, Route, Turn};

    fn platoon(size: u32) -> Platoon {
        let r = Route::new(Approach::East, 2, Turn::Straight, 6).unwrap();
        Platoon::entering(9, size, r, 1.2, 10.0, 12.0).unwrap()
    }

    #[test]
    fn singleton_is_unchanged_apart_from_id() {
        let mut ids = IdAllocator::new();
        let out = individualize(&[platoon(1)], &mut ids);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].size, 1);
        assert_eq!(out[0].entry_time, 10.0);
    }

    #[test]
    fn four_vehicles_become_four_staggered_singletons() {
        let mut ids = IdAllocator::new();
        let out = individualize(&[platoon(4)], &mut ids);
        let offsets: Vec<f64> = out.iter().map(|p| p.entry_time - 10.0).collect();
        assert_eq!(out.len(), 4);
        for (k, o) in offsets.iter().enumerate() {
            assert!((o - 1.2 * k as f64).abs() < 1e-12);
        }
        assert!(out.iter().all(|p| p.route == out[0].route && p.size == 1));
    }

    #[test]
    fn splitting_preserves_vehicle_count() {
        let mut ids = IdAllocator::new();
        for n in 1..=7 {
            for k in 1..=5 {
                let out = split_platoons(&[platoon(n)], k, &mut ids);
                assert_eq!(out.iter().map(|p| p.size).sum::<u32>(), n);
                assert!(out.iter().all(|p| p.size <= k));
            }
        }
        assert_eq!(split_sizes(5, 2), vec![(0, 2), (2, 2), (4, 1)]);
    }
}
