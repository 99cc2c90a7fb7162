//! Scenario files, experiment sweeps and result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platoon::PlatoonId;
use crate::sim::{leader_path_from_log, run, ControllerKind, RunResult, ScenarioSpec, Summary};

/// JSON schema every `summary.json` conforms to.
pub const SUMMARY_SCHEMA: &str = include_str!("../schema/summary.schema.json");

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a scenario document. Missing keys take their
/// defaults and unknown keys are rejected.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec> {
    let spec: ScenarioSpec = toml::from_str(text).map_err(|e| {
        let msg = e.message().trim().to_string();
        match e.span() {
            Some(span) => Error::Parse(format!("line {}: {msg}", line_of(text, span.start))),
            None => Error::Parse(msg),
        }
    })?;
    spec.validate()?;
    Ok(spec)
}

pub fn serialize_scenario(spec: &ScenarioSpec) -> String {
    toml::to_string(spec).expect("scenario specs always serialize")
}

/// The shipped default scenario with every key spelled out.
pub fn default_scenario_text() -> String {
    serialize_scenario(&ScenarioSpec::default())
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// One run of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub controller: ControllerKind,
    /// 0 keeps the generated platoon sizes.
    pub max_size: u32,
    pub seed: u64,
}

impl Cell {
    pub fn id(&self) -> String {
        format!("{}_size{}_seed{}", self.controller, self.max_size, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub base: ScenarioSpec,
    pub controllers: Vec<ControllerKind>,
    pub max_sizes: Vec<u32>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl ExperimentPlan {
    /// Sweep axes come from the scenario's experiment section. An empty
    /// size list sweeps only the scenario's own `max_platoon_size`.
    pub fn from_scenario(spec: &ScenarioSpec) -> Result<Self> {
        let x = &spec.experiment;
        let max_sizes = if x.max_sizes.is_empty() {
            vec![x.max_platoon_size]
        } else {
            x.max_sizes.clone()
        };
        let plan = ExperimentPlan {
            base: spec.clone(),
            controllers: x.controllers.clone(),
            max_sizes,
            seeds: x.seeds.clone(),
            output_dir: PathBuf::from(&x.output_dir),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let invalid = |key: &str, reason: &str| Error::Validation {
            key: key.into(),
            reason: reason.into(),
        };
        if self.controllers.is_empty() || self.max_sizes.is_empty() || self.seeds.is_empty() {
            return Err(invalid("experiment", "sweep has no cells"));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("experiment.seeds", "must be distinct"));
        }
        let mut kinds = self.controllers.clone();
        kinds.sort_unstable();
        if kinds.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("experiment.controllers", "must be distinct"));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &controller in &self.controllers {
            for &max_size in &self.max_sizes {
                for &seed in &self.seeds {
                    out.push(Cell {
                        controller,
                        max_size,
                        seed,
                    });
                }
            }
        }
        out
    }

    pub fn cell_spec(&self, cell: Cell) -> ScenarioSpec {
        let mut spec = self.base.with_controller(cell.controller).with_seed(cell.seed);
        spec.experiment.max_platoon_size = cell.max_size;
        spec
    }
}

/// Mean metrics of one (controller, max size) pair over the swept seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub controller: ControllerKind,
    pub max_size: u32,
    pub seeds: usize,
    pub mean_travel_time: f64,
    pub mean_delay: f64,
    pub mean_fuel: f64,
    pub mean_throughput: f64,
}

/// Relative change of a row against a baseline row, in percent. Negative
/// values are improvements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentChange {
    pub controller: ControllerKind,
    pub max_size: u32,
    pub travel_time: f64,
    pub delay: f64,
    pub fuel: f64,
}

pub fn percent_change(x: f64, baseline: f64) -> f64 {
    100.0 * (x - baseline) / baseline
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub cells: Vec<(Cell, Summary)>,
    pub rows: Vec<ComparisonRow>,
    /// Against FCFS_Ind at the same max size.
    pub vs_individual_fcfs: Vec<PercentChange>,
    /// Against the same controller with platoons of at most one vehicle.
    pub vs_size_one: Vec<PercentChange>,
}

impl ExperimentReport {
    pub fn row(&self, controller: ControllerKind, max_size: u32) -> Option<&ComparisonRow> {
        self.rows
            .iter()
            .find(|r| r.controller == controller && r.max_size == max_size)
    }
}

/// `baseline` maps a row to the (controller, max size) it is compared with.
fn compare(rows: &[ComparisonRow], baseline: impl Fn(&ComparisonRow) -> (ControllerKind, u32)) -> Vec<PercentChange> {
    rows.iter()
        .filter_map(|r| {
            let (c, k) = baseline(r);
            let b = rows.iter().find(|b| b.controller == c && b.max_size == k)?;
            Some(PercentChange {
                controller: r.controller,
                max_size: r.max_size,
                travel_time: percent_change(r.mean_travel_time, b.mean_travel_time),
                delay: percent_change(r.mean_delay, b.mean_delay),
                fuel: percent_change(r.mean_fuel, b.mean_fuel),
            })
        })
        .collect()
}

/// Aggregates per-cell summaries into comparison tables.
pub fn summarize(cells: Vec<(Cell, Summary)>) -> ExperimentReport {
    let mut groups: BTreeMap<(ControllerKind, u32), Vec<&Summary>> = BTreeMap::new();
    for (cell, s) in &cells {
        groups.entry((cell.controller, cell.max_size)).or_default().push(s);
    }
    let rows: Vec<ComparisonRow> = groups
        .into_iter()
        .map(|((controller, max_size), v)| {
            let n = v.len() as f64;
            let mean = |f: fn(&Summary) -> f64| v.iter().map(|s| f(s)).sum::<f64>() / n;
            ComparisonRow {
                controller,
                max_size,
                seeds: v.len(),
                mean_travel_time: mean(|s| s.average_travel_time),
                mean_delay: mean(|s| s.average_delay),
                mean_fuel: mean(|s| s.average_fuel),
                mean_throughput: mean(|s| s.throughput as f64),
            }
        })
        .collect();
    let vs_individual_fcfs = compare(&rows, |r| (ControllerKind::FcfsInd, r.max_size));
    let vs_size_one = compare(&rows, |r| (r.controller, 1));
    ExperimentReport {
        cells,
        rows,
        vs_individual_fcfs,
        vs_size_one,
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes the per-vehicle CSV, the JSON summary and, when recorded, the
/// event log of one run into `dir`, named after `stem`.
pub fn write_run(dir: &Path, stem: &str, result: &RunResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    write(&dir.join(format!("{stem}.csv")), &result.vehicles_csv())?;
    let json = serde_json::to_string_pretty(&result.summary).expect("summaries serialize");
    write(&dir.join(format!("{stem}.json")), &json)?;
    if !result.log.is_empty() {
        write(&dir.join(format!("{stem}.log")), &result.log)?;
    }
    Ok(())
}

fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("controller,max_size,seeds,mean_travel_time,mean_delay,mean_fuel,mean_throughput\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.controller, r.max_size, r.seeds, r.mean_travel_time, r.mean_delay, r.mean_fuel, r.mean_throughput
        );
    }
    out
}

fn percent_csv(rows: &[PercentChange]) -> String {
    let mut out = String::from("controller,max_size,travel_time_pct,delay_pct,fuel_pct\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.3},{:.3},{:.3}",
            r.controller, r.max_size, r.travel_time, r.delay, r.fuel
        );
    }
    out
}

/// Runs every cell in parallel and writes `cells/<id>.{csv,json}` plus the
/// comparison tables into the plan's output directory.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let cell_dir = plan.output_dir.join("cells");
    let cells = plan.cells();
    let mut results: Vec<(Cell, Summary)> = cells
        .par_iter()
        .map(|&cell| {
            let wrap = |e: Error| Error::Cell {
                cell: cell.id(),
                source: Box::new(e),
            };
            let result = run(&plan.cell_spec(cell)).map_err(wrap)?;
            write_run(&cell_dir, &cell.id(), &result).map_err(wrap)?;
            Ok((cell, result.summary))
        })
        .collect::<Result<_>>()?;
    results.sort_by_key(|(c, _)| *c);
    let report = summarize(results);
    write(&plan.output_dir.join("comparison.csv"), &comparison_csv(&report.rows))?;
    write(
        &plan.output_dir.join("percent_vs_fcfs_ind.csv"),
        &percent_csv(&report.vs_individual_fcfs),
    )?;
    write(&plan.output_dir.join("percent_vs_size1.csv"), &percent_csv(&report.vs_size_one))?;
    Ok(report)
}

/// Samples the leader of platoon `id` every `dt` from schedule-zone entry to
/// merging-zone exit, as `t,p,v,u` rows.
pub fn emit_trajectory_plotdata(log: &str, id: PlatoonId, dt: f64) -> Result<String> {
    let path = leader_path_from_log(log, id)?;
    let exit = log
        .lines()
        .filter_map(|l| {
            let f: Vec<&str> = l.split(' ').collect();
            (f.len() >= 4 && f[1] == "EXIT" && f[2].parse::<PlatoonId>().ok() == Some(id)).then(|| f[3].parse::<f64>().ok())?
        })
        .next_back();
    let start = path.start_time();
    let end = exit.unwrap_or_else(|| {
        path.segments()
            .iter()
            .map(|s| s.t_f)
            .filter(|t| t.is_finite())
            .fold(start, f64::max)
    });
    let mut out = String::from("t,p,v,u\n");
    let mut k = 0u64;
    loop {
        let t = (start + k as f64 * dt).min(end);
        let s = path.state_at(t);
        let _ = writeln!(out, "{t},{},{},{}", s.position, s.velocity, s.control);
        if t >= end {
            break;
        }
        k += 1;
    }
    Ok(out)
}
