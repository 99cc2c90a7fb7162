use nalgebra::{Matrix4, Vector4};

use super::{feasibility_check, Segment, Trajectory, TrajectoryKind};
use crate::error::{Error, Result};
use crate::platoon::ControlBounds;
use crate::scheduler::earliest_arrival;

/// Tolerance on scheduled durations relative to the time-optimal minimum.
const TIME_EPS: f64 = 1e-9;

/// Boundary data of a leader plan: start `(t0, p0, v0)`, end `(tm, pf, vf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub t0: f64,
    pub p0: f64,
    pub v0: f64,
    pub tm: f64,
    pub pf: f64,
    pub vf: f64,
}

impl Boundary {
    pub fn from_entry(t0: f64, tm: f64, v0: f64, distance: f64, v_target: f64) -> Self {
        Boundary {
            t0,
            p0: 0.0,
            v0,
            tm,
            pf: distance,
            vf: v_target,
        }
    }

    fn duration(&self) -> f64 {
        self.tm - self.t0
    }

    fn distance(&self) -> f64 {
        self.pf - self.p0
    }
}

/// Full acceleration to `v_max`, then cruise, from schedule-zone entry.
pub fn time_optimal(v0: f64, t0: f64, distance: f64, v_max: f64, u_max: f64) -> Result<Trajectory> {
    time_optimal_from(t0, 0.0, v0, distance, v_max, u_max)
}

pub fn time_optimal_from(t0: f64, p0: f64, v0: f64, pf: f64, v_max: f64, u_max: f64) -> Result<Trajectory> {
    let (arrival, t_s, d_s) = earliest_arrival(v0, pf - p0, v_max, u_max)?;
    let mut segments = Vec::with_capacity(2);
    if t_s > 0.0 {
        segments.push(Segment::constant(t0, t0 + t_s, p0, v0, u_max));
        segments.push(Segment::constant(t0 + t_s, t0 + arrival, p0 + d_s, v_max, 0.0));
    } else {
        segments.push(Segment::constant(t0, t0 + arrival, p0, v_max, 0.0));
    }
    Trajectory::from_segments(TrajectoryKind::TimeOptimal, segments)
}

/// Affine-control, cubic-position trajectory from schedule-zone entry at
/// `t0` to the merging zone at `tm`. Falls back to [`stop_wait_fallback`]
/// when the cubic leaves the speed or control bounds.
pub fn energy_optimal(
    t0: f64,
    tm: f64,
    v0: f64,
    distance: f64,
    v_target: f64,
    bounds: &ControlBounds,
) -> Result<Trajectory> {
    energy_optimal_from(&Boundary::from_entry(t0, tm, v0, distance, v_target), bounds)
}

pub fn energy_optimal_from(b: &Boundary, bounds: &ControlBounds) -> Result<Trajectory> {
    check_duration(b, bounds)?;
    let cubic = unconstrained_cubic(b)?;
    if feasibility_check(&cubic, bounds).feasible {
        Ok(cubic)
    } else {
        stop_wait_from(b, bounds)
    }
}

fn check_duration(b: &Boundary, bounds: &ControlBounds) -> Result<f64> {
    let (minimum, _, _) = earliest_arrival(b.v0, b.distance(), bounds.v_max, bounds.u_max)?;
    if b.duration() < minimum - TIME_EPS {
        return Err(Error::InfeasibleSchedule(format!(
            "{:.6} s to cover {:.3} m is below the time-optimal minimum {:.6} s",
            b.duration(),
            b.distance(),
            minimum
        )));
    }
    Ok(minimum)
}

/// Solves the boundary-value system for the cubic in normalised time
/// `s = τ/T`, which keeps the matrix well conditioned for long horizons.
fn unconstrained_cubic(b: &Boundary) -> Result<Trajectory> {
    let t = b.duration();
    if !(t > 0.0) {
        return Err(Error::InfeasibleSchedule(format!("entry {} does not follow start {}", b.tm, b.t0)));
    }
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 1.0, 0.0,
        1.0, 1.0, 1.0, 1.0,
        3.0, 2.0, 1.0, 0.0,
    );
    let rhs = Vector4::new(b.p0, b.v0 * t, b.pf, b.vf * t);
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InfeasibleSchedule("singular boundary system".into()))?;
    let a = 6.0 * x[0] / (t * t * t);
    let bb = 2.0 * x[1] / (t * t);
    Trajectory::from_segments(
        TrajectoryKind::EnergyOptimal,
        vec![Segment::cubic(b.t0, b.tm, b.p0, b.v0, a, bb)],
    )
}

/// Bounded fallback from schedule-zone entry; see [`stop_wait_from`].
pub fn stop_wait_fallback(
    t0: f64,
    tm: f64,
    v0: f64,
    distance: f64,
    v_target: f64,
    bounds: &ControlBounds,
) -> Result<Trajectory> {
    stop_wait_from(&Boundary::from_entry(t0, tm, v0, distance, v_target), bounds)
}

/// Bang-off-bang profile built from bounded phases.
///
/// With enough time: cruise at `v0`, brake at `u_min` to a stop at the hold
/// point `pf - vf²/(2 u_max)`, hold, then accelerate at `u_max` to reach
/// `vf` exactly at `pf`. When the stop itself would arrive too late, the
/// hold is replaced by a cruise at a reduced speed `v_c` found by
/// bisection (the trip duration is monotone in `v_c`).
pub fn stop_wait_from(b: &Boundary, bounds: &ControlBounds) -> Result<Trajectory> {
    let (ua, ud) = (bounds.u_max, -bounds.u_min);
    let (v, vt, dist, total) = (b.v0, b.vf, b.distance(), b.duration());
    if vt < 0.0 || v < 0.0 {
        return Err(Error::InfeasibleSchedule("negative boundary speed".into()));
    }
    let d_stop = v * v / (2.0 * ud);
    let d_launch = vt * vt / (2.0 * ua);
    let pre = dist - d_stop - d_launch;

    if v > 1e-9 && pre >= 0.0 {
        let t_pre = pre / v;
        let hold = total - (t_pre + v / ud + vt / ua);
        if hold >= 0.0 {
            let mut segs = Vec::with_capacity(4);
            let mut t = b.t0;
            segs.push(Segment::constant(t, t + t_pre, b.p0, v, 0.0));
            t += t_pre;
            let hold_point = b.pf - d_launch;
            segs.push(Segment::constant(t, t + v / ud, b.p0 + pre, v, -ud));
            t += v / ud;
            segs.push(Segment::constant(t, t + hold, hold_point, 0.0, 0.0));
            t += hold;
            segs.push(Segment::constant(t, b.tm, hold_point, 0.0, ua));
            return Trajectory::from_segments(TrajectoryKind::StopWait, segs);
        }
    }
    crawl(b, ua, ud)
}

/// Phase lengths `(t1, d1, t3, d3)` when moving from `v` to `vc` and then
/// from `vc` to `vt`.
fn crawl_phases(v: f64, vc: f64, vt: f64, ua: f64, ud: f64) -> (f64, f64, f64, f64) {
    let acc1 = if vc >= v { ua } else { ud };
    let t1 = (vc - v).abs() / acc1;
    let d1 = (vc * vc - v * v).abs() / (2.0 * acc1);
    let t3 = (vt - vc) / ua;
    let d3 = (vt * vt - vc * vc) / (2.0 * ua);
    (t1, d1, t3, d3)
}

fn crawl(b: &Boundary, ua: f64, ud: f64) -> Result<Trajectory> {
    let (v, vt, dist, total) = (b.v0, b.vf, b.distance(), b.duration());
    let duration_at = |vc: f64| {
        let (t1, d1, t3, d3) = crawl_phases(v, vc, vt, ua, ud);
        t1 + t3 + (dist - d1 - d3) / vc
    };
    // Cruise distance grows with vc below v and is constant above it.
    let floor_sq = (v * v / ud + vt * vt / ua - 2.0 * dist) / (1.0 / ud + 1.0 / ua);
    let lo_bound = if floor_sq > 0.0 { floor_sq.sqrt() } else { 0.0 };
    let (_, d1, _, d3) = crawl_phases(v, vt, vt, ua, ud);
    if d1 + d3 > dist + 1e-9 || lo_bound > vt {
        return Err(Error::InfeasibleSchedule(format!(
            "no bounded profile covers {dist:.3} m from {v:.3} m/s to {vt:.3} m/s"
        )));
    }
    if lo_bound > 0.0 && duration_at(lo_bound) < total - TIME_EPS {
        return Err(Error::InfeasibleSchedule(format!(
            "no feasible hold point: cannot stretch {dist:.3} m beyond {:.3} s",
            duration_at(lo_bound)
        )));
    }
    let (mut lo, mut hi) = (lo_bound, vt);
    if duration_at(hi) > total + TIME_EPS {
        return Err(Error::InfeasibleSchedule(format!(
            "{total:.6} s is below the minimum {:.6} s",
            duration_at(hi)
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if duration_at(mid) > total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let vc = if lo_bound > 0.0 && duration_at(lo) <= total { lo } else { hi };
    let (t1, d1, t3, _) = crawl_phases(v, vc, vt, ua, ud);
    let t_cruise = (total - t1 - t3).max(0.0);
    let u1 = if vc >= v { ua } else { -ud };
    let mut t = b.t0;
    let segs = vec![
        Segment::constant(t, t + t1, b.p0, v, u1),
        Segment::constant(t + t1, t + t1 + t_cruise, b.p0 + d1, vc, 0.0),
        {
            t += t1 + t_cruise;
            Segment::constant(t, b.tm, b.p0 + d1 + vc * t_cruise, vc, ua)
        },
    ];
    Trajectory::from_segments(TrajectoryKind::StopWait, segs)
}

/// The leader plan used by the simulator: time-optimal when the entry time
/// is the earliest possible, else the energy-optimal cubic when it respects
/// the bounds, else the stop-and-wait fallback. Terminal speed is
/// `bounds.v_max`.
pub fn plan(t0: f64, p0: f64, v0: f64, tm: f64, pf: f64, bounds: &ControlBounds) -> Result<Trajectory> {
    let b = Boundary {
        t0,
        p0,
        v0,
        tm,
        pf,
        vf: bounds.v_max,
    };
    let minimum = check_duration(&b, bounds)?;
    if b.duration() <= minimum + TIME_EPS {
        return time_optimal_from(t0, p0, v0, pf, bounds.v_max, bounds.u_max);
    }
    energy_optimal_from(&b, bounds)
}
