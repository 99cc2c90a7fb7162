use serde::{Deserialize, Serialize};

use crate::geometry::Movement;

/// Lanes that may discharge together, with their current queued vehicles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneGroup {
    pub movements: Vec<Movement>,
    pub weight: u32,
}

/// One lane group per compatible-movement group, with zero weight.
pub fn lane_groups(compatible: &[Vec<Movement>]) -> Vec<LaneGroup> {
    compatible
        .iter()
        .map(|g| LaneGroup {
            movements: g.clone(),
            weight: 0,
        })
        .collect()
}

/// Index of the heaviest weight, ties to the lowest index. `None` when
/// every weight is zero.
pub fn select_max_weight(weights: &[u32]) -> Option<usize> {
    let mut best: Option<(usize, u32)> = None;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0 && best.is_none_or(|(_, bw)| w > bw) {
            best = Some((k, w));
        }
    }
    best.map(|(k, _)| k)
}

/// Weighs each lane group by the vehicles queued on its movements and
/// returns the group given right of way, if any lane is occupied.
pub fn lqf_mwm_controller(queues: &[u32; Movement::COUNT], groups: &mut [LaneGroup]) -> Option<usize> {
    for g in groups.iter_mut() {
        g.weight = g.movements.iter().map(|m| queues[m.index()]).sum();
    }
    let weights: Vec<u32> = groups.iter().map(|g| g.weight).collect();
    select_max_weight(&weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::default_compatible_groups;

    #[test]
    fn argmax_examples() {
        assert_eq!(select_max_weight(&[0, 4, 0, 0]), Some(1));
        assert_eq!(select_max_weight(&[5, 3, 0, 7]), Some(3));
        assert_eq!(select_max_weight(&[2, 2, 1]), Some(0));
        assert_eq!(select_max_weight(&[0, 0]), None);
    }

    #[test]
    fn default_groups_follow_the_lane_numbering() {
        let groups = lane_groups(&default_compatible_groups());
        let lanes: Vec<Vec<u8>> = groups
            .iter()
            .map(|g| {
                let mut l: Vec<u8> = g.movements.iter().map(|m| m.lane_number()).collect();
                l.sort();
                l
            })
            .collect();
        assert_eq!(lanes, vec![vec![2, 3, 5, 6], vec![1, 4], vec![8, 9, 10, 11], vec![7, 12]]);
    }

    #[test]
    fn weights_sum_member_queues() {
        let mut groups = lane_groups(&default_compatible_groups());
        let mut q = [0u32; Movement::COUNT];
        q[groups[1].movements[0].index()] = 3;
        q[groups[1].movements[1].index()] = 2;
        q[groups[0].movements[2].index()] = 4;
        assert_eq!(lqf_mwm_controller(&q, &mut groups), Some(1));
        assert_eq!(groups[1].weight, 5);
        assert_eq!(groups[0].weight, 4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn argmax_is_scale_invariant(w in proptest::collection::vec(0u32..50, 1..8), k in 1u32..20) {
                let scaled: Vec<u32> = w.iter().map(|x| x * k).collect();
                prop_assert_eq!(select_max_weight(&w), select_max_weight(&scaled));
                if let Some(i) = select_max_weight(&w) {
                    prop_assert!(w.iter().all(|&x| x <= w[i]));
                }
            }
        }
    }
}
