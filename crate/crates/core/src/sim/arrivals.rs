//! Seeded random streams and Poisson platoon arrivals.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};

use super::spec::DemandSpec;
use crate::error::{Error, Result};
use crate::geometry::{turn_vmax, Approach, IntersectionGeometry, Movement};

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the named stream derived from a scenario seed. Streams with
/// different labels are independent, so adding a stream never shifts
/// another one.
pub fn stream_seed(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ fnv1a(label))
}

pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, label))
}

/// A platoon reaching the schedule-zone entrance, before any lane gating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub time: f64,
    pub movement: Movement,
    pub size: u32,
    pub speed: f64,
}

/// Independent Poisson streams per approach on `[0, horizon)`, merged in
/// time order (ties by approach). Sizes, movements and speeds are drawn
/// per arrival in that order.
pub fn spawn_arrivals(demand: &DemandSpec, geom: &IntersectionGeometry, horizon: f64, seed: u64) -> Result<Vec<Arrival>> {
    let sizes = WeightedIndex::new(&demand.size_weights)
        .map_err(|e| Error::Validation {
            key: "demand.size_weights".into(),
            reason: e.to_string(),
        })?;
    let shares = demand.turn_shares();
    let turns = WeightedIndex::new(shares.iter().map(|(_, w)| *w)).map_err(|e| Error::Validation {
        key: "demand.straight_share".into(),
        reason: e.to_string(),
    })?;
    let mut out = Vec::new();
    for approach in Approach::ALL {
        let rate = demand.rate(approach) / 3600.0;
        if !(rate > 0.0) {
            continue;
        }
        let gaps = Exp::new(rate).map_err(|e| Error::Validation {
            key: format!("demand.rate_{}", approach.letter().to_ascii_lowercase()),
            reason: e.to_string(),
        })?;
        let mut rng = stream(seed, &format!("arrivals/{approach}"));
        let mut t = 0.0;
        loop {
            t += gaps.sample(&mut rng);
            if t >= horizon {
                break;
            }
            let size = sizes.sample(&mut rng) as u32 + 1;
            let turn = shares[turns.sample(&mut rng)].0;
            let v_max = turn_vmax(turn, geom);
            let speed = v_max * (demand.speed_fraction + (1.0 - demand.speed_fraction) * rng.random::<f64>());
            out.push(Arrival {
                time: t,
                movement: Movement::new(approach, turn),
                size,
                speed,
            });
        }
    }
    out.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then(a.movement.approach.cmp(&b.movement.approach))
    });
    Ok(out)
}
