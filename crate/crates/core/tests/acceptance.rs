//! Acceptance sweep. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use platoon_core::geometry::{merging_distance, turn_speed_limit, Approach, IntersectionGeometry, Movement, Route, Turn};
use platoon_core::scheduler::{
    assign_entry_times, build_groups, earliest_arrival, edd_sequence_lane_ordered, enumerate_maximal_cliques,
    Candidate, CompatibilityGraph, Group, PlatoonTiming, UniformRelease,
};
use platoon_core::sim::{run, spawn_arrivals, stream, ControllerKind, ScenarioSpec};
use platoon_core::trajectory::{energy_optimal, time_optimal, Law, TrajectoryKind};
use platoon_core::{ControlBounds, Error, MovementConflictTable};
use rand::{Rng, RngCore};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn edd_optimality() -> Outcome {
    let mut rng = stream(2024, "acceptance/edd");
    let movements: Vec<Movement> = Movement::all().collect();
    let mut worst_gap: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.random_range(2..=7);
        let jobs: Vec<(f64, f64)> = (0..k)
            .map(|_| {
                let p = rng.random_range(5.0..=30.0);
                (p, p + rng.random_range(0.0..=120.0))
            })
            .collect();
        let groups: Vec<Group> = jobs
            .iter()
            .enumerate()
            .map(|(i, &(p, d))| {
                Group::new(vec![Candidate {
                    id: i as u64 + 1,
                    movement: movements[i],
                    entry_time: 0.0,
                    timing: PlatoonTiming {
                        arrival_time_min: 0.0,
                        crossing_time: p,
                        passing_time: p,
                        deadline: d,
                        ..Default::default()
                    },
                }])
            })
            .collect();
        let schedule = assign_entry_times(edd_sequence_lane_ordered(groups), 0.0, &UniformRelease(0.0));
        let best = common::brute_force_max_lateness(&jobs);
        worst_gap = worst_gap.max((schedule.max_lateness() - best).abs());
    }
    outcome(
        worst_gap <= 1e-9,
        format!("1000 instances, largest gap to brute force {worst_gap:.2e} s"),
    )
}

fn clique_oracle() -> Outcome {
    let mut rng = stream(2024, "acceptance/cliques");
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let p = rng.random_range(0.1..0.9);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        let g = CompatibilityGraph::from_edges(n, &edges);
        if enumerate_maximal_cliques(&g, 64).unwrap() != common::brute_force_maximal_cliques(&g) {
            mismatches += 1;
        }
    }
    let table = MovementConflictTable::four_leg_default();
    let m = |a, t| Movement::new(a, t);
    let cases = [
        vec![m(Approach::North, Turn::Straight), m(Approach::South, Turn::Straight), m(Approach::North, Turn::Right)],
        vec![m(Approach::North, Turn::Straight), m(Approach::South, Turn::Straight), m(Approach::East, Turn::Straight)],
        vec![m(Approach::North, Turn::Straight), m(Approach::East, Turn::Straight), m(Approach::North, Turn::Left)],
    ];
    let counts: Vec<usize> = cases
        .iter()
        .map(|movements| {
            let cands: Vec<Candidate> = movements
                .iter()
                .enumerate()
                .map(|(i, &movement)| Candidate {
                    id: i as u64 + 1,
                    movement,
                    entry_time: 0.0,
                    timing: PlatoonTiming::default(),
                })
                .collect();
            let labelled: Vec<_> = cands.iter().map(|c| (c.id, c.movement)).collect();
            let g = CompatibilityGraph::from_movements(&labelled, &table).unwrap();
            build_groups(&cands, &g, 64).unwrap().len()
        })
        .collect();
    outcome(
        mismatches == 0 && counts == [1, 2, 3],
        format!("500 graphs, {mismatches} mismatches; three-platoon cases give {counts:?} groups"),
    )
}

fn geometry_closed_forms() -> Outcome {
    let m = 50.0;
    let g = IntersectionGeometry {
        lanes_per_approach: 4,
        merging_zone_side: m,
        ..IntersectionGeometry::default()
    };
    let mut worst: f64 = 0.0;
    for lane in 1..=4 {
        for (turn, expected) in [
            (Turn::Left, [7.0, 5.0, 3.0, 1.0][lane as usize - 1]),
            (Turn::Right, [1.0, 3.0, 5.0, 7.0][lane as usize - 1]),
        ] {
            let d = merging_distance(&Route::new(Approach::West, lane, turn, 4).unwrap(), &g).unwrap();
            let exact = expected / 8.0 * PI * m;
            worst = worst.max((d - exact).abs() / exact);
        }
    }
    let v = turn_speed_limit(100.0, 0.0, 0.15).unwrap();
    outcome(
        worst <= 1e-12 && v == 15.0,
        format!("8 turn distances, worst relative error {worst:.1e}; speed limit {v} m/s"),
    )
}

fn trajectory_correctness() -> Outcome {
    let mut rng = stream(2024, "acceptance/trajectories");
    let bounds = ControlBounds::default();
    let (s, vt) = (200.0, 18.0);
    let (mut residual, mut ratio, mut affine, mut t_err): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut accepted = 0;
    let mut drawn = 0;
    while accepted < 1000 {
        drawn += 1;
        let v0 = rng.random_range(0.0..=vt);
        let t0 = rng.random_range(0.0..100.0);
        let t_min = earliest_arrival(v0, s, vt, bounds.u_max).unwrap().0;
        let tm = t0 + t_min + rng.random_range(0.0..15.0);

        let fast = time_optimal(v0, t0, s, vt, bounds.u_max).unwrap();
        t_err = t_err.max((fast.duration() - t_min).abs());

        let traj = energy_optimal(t0, tm, v0, s, vt, &bounds).unwrap();
        if traj.kind != TrajectoryKind::EnergyOptimal {
            continue;
        }
        accepted += 1;
        let end = traj.evaluate(tm).unwrap();
        residual = residual.max((end.position - s).abs()).max((end.velocity - vt).abs());
        let oracle = common::collocation_cost(v0, vt, s, tm - t0, 200);
        ratio = ratio.max(traj.control_effort() / oracle.max(1e-12));

        let seg = &traj.segments[0];
        assert!(matches!(seg.law, Law::Cubic { .. }));
        let u = |t: f64| traj.evaluate(t).unwrap().control;
        let slope = (u(tm) - u(t0)) / (tm - t0);
        for k in 1..10 {
            let t = t0 + (tm - t0) * k as f64 / 10.0;
            affine = affine.max((u(t) - u(t0) - slope * (t - t0)).abs());
        }
    }
    outcome(
        residual < 1e-9 && ratio <= 1.0 + 1e-3 && affine < 1e-9 && t_err < 1e-9,
        format!(
            "1000 cubic plans ({drawn} drawn): residual {residual:.1e}, cost/collocation {ratio:.6}, \
             affine deviation {affine:.1e}, time-optimal duration error {t_err:.1e}"
        ),
    )
}

fn random_scenario(index: u64) -> ScenarioSpec {
    let mut rng = stream(index, "acceptance/scenario");
    let mut spec = ScenarioSpec::default();
    spec.experiment.seed = rng.next_u64();
    let d = &mut spec.demand;
    for r in [&mut d.rate_n, &mut d.rate_e, &mut d.rate_s, &mut d.rate_w] {
        *r = rng.random_range(0.0..120.0);
    }
    d.size_weights = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
    d.size_weights[0] += 1e-3;
    let shares: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = shares.iter().sum();
    (d.straight_share, d.left_share, d.right_share) = (shares[0] / sum, shares[1] / sum, shares[2] / sum);
    d.straight_share = 1.0 - d.left_share - d.right_share;
    d.speed_fraction = rng.random_range(0.2..=1.0);
    d.headway = rng.random_range(0.8..2.0);
    spec.controller.lqf_interval = rng.random_range(2.0..10.0);
    spec
}

fn safety_sweep(scenarios: u64) -> Outcome {
    let failures: Vec<String> = (0..scenarios)
        .into_par_iter()
        .flat_map_iter(|i| {
            let base = random_scenario(i);
            let spawned: u64 = spawn_arrivals(&base.demand, &base.geometry, base.experiment.horizon, base.experiment.seed)
                .unwrap()
                .iter()
                .map(|a| a.size as u64)
                .sum();
            ControllerKind::ALL.into_iter().filter_map(move |kind| {
                let spec = base.with_controller(kind);
                match run(&spec) {
                    Ok(r) => {
                        let s = &r.summary;
                        let conserved = s.spawned_vehicles == spawned
                            && s.exited_vehicles + s.in_flight_at_end == spawned
                            && s.in_flight_at_end == 0
                            && r.vehicles.len() as u64 == spawned;
                        (!conserved).then(|| format!("scenario {i} {kind}: conservation broken"))
                    }
                    Err(e @ Error::SafetyViolation { .. }) => Some(format!("scenario {i} {kind}: {e}")),
                    Err(e) => Some(format!("scenario {i} {kind}: fault {e}")),
                }
            })
        })
        .collect();
    let first = failures.first().cloned().unwrap_or_default();
    outcome(
        failures.is_empty(),
        format!(
            "{scenarios} scenarios x {} controllers, {} failures {first}",
            ControllerKind::ALL.len(),
            failures.len()
        ),
    )
}

/// Mean travel time and fuel per seed for every controller at the default
/// scenario, seeds 1..=n.
fn paired_runs(n: u64, kind: ControllerKind, max_size: u32) -> Vec<(f64, f64)> {
    (1..=n)
        .into_par_iter()
        .map(|seed| {
            let mut spec = ScenarioSpec::default().with_controller(kind).with_seed(seed);
            spec.experiment.max_platoon_size = max_size;
            let s = run(&spec).unwrap().summary;
            (s.average_travel_time, s.average_fuel)
        })
        .collect()
}

fn win_rate(a: &[(f64, f64)], b: &[(f64, f64)], pick: fn(&(f64, f64)) -> f64) -> f64 {
    a.iter().zip(b).filter(|(x, y)| pick(x) < pick(y)).count() as f64 / a.len() as f64
}

fn mean(a: &[(f64, f64)], pick: fn(&(f64, f64)) -> f64) -> f64 {
    a.iter().map(pick).sum::<f64>() / a.len() as f64
}

fn table_one(seeds: u64) -> Outcome {
    use ControllerKind::*;
    let r: Vec<Vec<(f64, f64)>> = ControllerKind::ALL.iter().map(|&k| paired_runs(seeds, k, 0)).collect();
    let at = |k: ControllerKind| &r[ControllerKind::ALL.iter().position(|&x| x == k).unwrap()];
    let tt = |p: &(f64, f64)| p.0;
    let fuel = |p: &(f64, f64)| p.1;
    let wins = [
        win_rate(at(OcPlatoon), at(FcfsPlatoon), tt),
        win_rate(at(FcfsPlatoon), at(FcfsInd), tt),
        win_rate(at(OcInd), at(FcfsInd), tt),
    ];
    let means: Vec<f64> = r.iter().map(|x| mean(x, tt)).collect();
    let fuels: Vec<f64> = r.iter().map(|x| mean(x, fuel)).collect();
    let reduction = 1.0 - mean(at(OcPlatoon), tt) / mean(at(FcfsInd), tt);
    let ordered = mean(at(OcPlatoon), tt) < mean(at(FcfsPlatoon), tt)
        && mean(at(FcfsPlatoon), tt) < mean(at(FcfsInd), tt)
        && mean(at(OcInd), tt) < mean(at(FcfsInd), tt);
    let fuel_ok = mean(at(OcPlatoon), fuel) < mean(at(FcfsInd), fuel) && mean(at(LqfMwm), fuel) > mean(at(OcPlatoon), fuel);
    let names: Vec<String> = ControllerKind::ALL
        .iter()
        .zip(means.iter().zip(&fuels))
        .map(|(k, (t, f))| format!("{k} {t:.2}s/{f:.2}"))
        .collect();
    outcome(
        ordered && wins.iter().all(|&w| w >= 0.95) && reduction >= 0.40 && fuel_ok,
        format!(
            "{seeds} paired seeds; travel/fuel {}; win rates {:.2}/{:.2}/{:.2}; OC_Platoon vs FCFS_Ind {:.1}% lower",
            names.join(", "),
            wins[0],
            wins[1],
            wins[2],
            100.0 * reduction
        ),
    )
}

fn table_two(seeds: u64) -> Outcome {
    let r: Vec<Vec<(f64, f64)>> = (1..=5).map(|k| paired_runs(seeds, ControllerKind::OcPlatoon, k)).collect();
    let means: Vec<f64> = r.iter().map(|x| mean(x, |p| p.0)).collect();
    let mono: Vec<f64> = (0..4)
        .map(|k| r[k + 1].iter().zip(&r[k]).filter(|(a, b)| a.0 <= b.0).count() as f64 / seeds as f64)
        .collect();
    let pass = means.windows(2).all(|w| w[1] <= w[0]) && mono.iter().all(|&m| m >= 0.90);
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.2}")).collect();
    outcome(
        pass,
        format!("mean travel by max size 1..5: {}; adjacent monotone fractions {mono:.2?}", shown.join(", ")),
    )
}

fn determinism() -> Outcome {
    let mut identical = true;
    let mut lines = 0;
    for kind in ControllerKind::ALL {
        let mut spec = ScenarioSpec::default().with_controller(kind).with_seed(17);
        spec.experiment.record_log = true;
        let a = run(&spec).unwrap().log;
        let b = run(&spec).unwrap().log;
        identical &= !a.is_empty() && a == b;
        lines += a.lines().count();
    }
    outcome(identical, format!("5 cells run twice, {lines} log lines, byte-identical: {identical}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |n: u32, name: &'static str, o: Outcome| {
        println!("criterion {n} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    record(1, "EDD optimality", edd_optimality());
    record(2, "maximal cliques", clique_oracle());
    record(3, "geometry closed forms", geometry_closed_forms());
    record(4, "trajectory correctness", trajectory_correctness());
    record(5, "safety and conservation", safety_sweep(10_000));
    record(6, "controller ordering", table_one(30));
    record(7, "platoon size trend", table_two(30));
    let det = determinism();
    let elapsed = start.elapsed().as_secs_f64();
    let det = outcome(
        det.pass && elapsed < 600.0,
        format!("{}; whole sweep {elapsed:.1} s on {} threads", det.detail, rayon::current_num_threads()),
    );
    record(8, "determinism", det);
    if results.iter().all(|(_, _, o)| o.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
