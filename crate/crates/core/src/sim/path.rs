//! Realised leader motion: a growing list of closed-form segments.

use crate::platoon::VehicleState;
use crate::trajectory::{Law, Segment};

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderPath {
    segments: Vec<Segment>,
}

impl LeaderPath {
    /// The last segment may end at `f64::INFINITY`.
    pub fn new(segments: Vec<Segment>) -> Self {
        debug_assert!(!segments.is_empty());
        LeaderPath { segments }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start_time(&self) -> f64 {
        self.segments[0].t_i
    }

    /// State at `t`. Before the first segment the leader is extrapolated at
    /// its initial speed, so followers can be placed upstream of the zone.
    pub fn state_at(&self, t: f64) -> VehicleState {
        let first = &self.segments[0];
        if t < first.t_i {
            return VehicleState::new(first.p0 + first.v0 * (t - first.t_i), first.v0, 0.0);
        }
        let k = self.segments.partition_point(|s| s.t_f < t);
        self.segments[k.min(self.segments.len() - 1)].state_at(t)
    }

    /// Keeps the motion before `t` and continues with `tail`, which must
    /// start at `t`.
    pub fn replace_from(&mut self, t: f64, tail: impl IntoIterator<Item = Segment>) {
        self.segments.retain(|s| s.t_i < t);
        if let Some(last) = self.segments.last_mut() {
            last.t_f = last.t_f.min(t);
        }
        self.segments.extend(tail.into_iter().filter(|s| s.t_f > s.t_i));
    }

    /// First time the leader reaches `x`, if it ever does.
    pub fn time_at_position(&self, x: f64) -> Option<f64> {
        let first = &self.segments[0];
        if x < first.p0 {
            return (first.v0 > 0.0).then(|| first.t_i - (first.p0 - x) / first.v0);
        }
        for s in &self.segments {
            let end = s.end_state().position;
            if end < x && s.t_f.is_finite() {
                continue;
            }
            return segment_time_at(s, x);
        }
        None
    }
}

fn segment_time_at(s: &Segment, x: f64) -> Option<f64> {
    let dx = x - s.p0;
    if dx <= 0.0 {
        return Some(s.t_i);
    }
    match s.law {
        Law::ConstantAccel { u } => {
            let tau = if u.abs() < 1e-12 {
                if s.v0 <= 0.0 {
                    return None;
                }
                dx / s.v0
            } else {
                let disc = s.v0 * s.v0 + 2.0 * u * dx;
                if disc < 0.0 {
                    return None;
                }
                // Stable root of ½uτ² + v0τ - dx = 0.
                2.0 * dx / (s.v0 + disc.sqrt())
            };
            (s.t_i + tau <= s.t_f).then_some(s.t_i + tau)
        }
        Law::Cubic { .. } => {
            if s.end_state().position < x {
                return None;
            }
            let (mut lo, mut hi) = (s.t_i, s.t_f);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if s.state_at(mid).position < x {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(hi)
        }
    }
}
