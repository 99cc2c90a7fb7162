//! Scenario description: geometry, demand, controller, fuel model and run settings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::FcfsMode;
use crate::error::{Error, Result};
use crate::geometry::{default_compatible_groups, Approach, IntersectionGeometry, Movement, MovementConflictTable, Turn};
use crate::platoon::ControlBounds;
use crate::scheduler::SchedulerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "OC_Platoon")]
    OcPlatoon,
    #[serde(rename = "FCFS_Platoon")]
    FcfsPlatoon,
    #[serde(rename = "FCFS_Ind")]
    FcfsInd,
    #[serde(rename = "OC_Ind")]
    OcInd,
    #[serde(rename = "LQF_MWM")]
    LqfMwm,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 5] = [
        ControllerKind::OcPlatoon,
        ControllerKind::FcfsPlatoon,
        ControllerKind::FcfsInd,
        ControllerKind::OcInd,
        ControllerKind::LqfMwm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::OcPlatoon => "OC_Platoon",
            ControllerKind::FcfsPlatoon => "FCFS_Platoon",
            ControllerKind::FcfsInd => "FCFS_Ind",
            ControllerKind::OcInd => "OC_Ind",
            ControllerKind::LqfMwm => "LQF_MWM",
        }
    }

    /// Whether platoons are broken into single vehicles before entry.
    pub fn individual(self) -> bool {
        matches!(self, ControllerKind::FcfsInd | ControllerKind::OcInd)
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ControllerKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown controller `{s}`; expected one of OC_Platoon, FCFS_Platoon, FCFS_Ind, OC_Ind, LQF_MWM"
                ))
            })
    }
}

/// When the optimal controller recomputes its schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    /// On arrivals and commitments only.
    #[default]
    Events,
    /// Additionally at every time step.
    EveryStep,
}

/// Arrival process. Rates are platoons per hour per approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandSpec {
    pub rate_n: f64,
    pub rate_e: f64,
    pub rate_s: f64,
    pub rate_w: f64,
    /// Relative weights of platoon sizes 1, 2, 3, ...
    pub size_weights: Vec<f64>,
    pub straight_share: f64,
    pub left_share: f64,
    pub right_share: f64,
    /// Time headway inside a platoon.
    pub headway: f64,
    /// Entry speeds are uniform on `[speed_fraction * v_max, v_max]` of the route.
    pub speed_fraction: f64,
}

impl Default for DemandSpec {
    fn default() -> Self {
        DemandSpec {
            rate_n: 0.0,
            rate_e: 0.0,
            rate_s: 0.0,
            rate_w: 0.0,
            size_weights: vec![1.0; 5],
            straight_share: 0.5,
            left_share: 0.2,
            right_share: 0.3,
            headway: 1.2,
            speed_fraction: 0.5,
        }
    }
}

impl DemandSpec {
    /// Demand used by the shipped default scenario.
    pub fn moderate() -> Self {
        let r = 120.0;
        DemandSpec {
            rate_n: r,
            rate_e: r,
            rate_s: r,
            rate_w: r,
            ..Default::default()
        }
    }

    pub fn rate(&self, approach: Approach) -> f64 {
        match approach {
            Approach::North => self.rate_n,
            Approach::East => self.rate_e,
            Approach::South => self.rate_s,
            Approach::West => self.rate_w,
        }
    }

    pub fn set_all_rates(&mut self, rate: f64) {
        self.rate_n = rate;
        self.rate_e = rate;
        self.rate_s = rate;
        self.rate_w = rate;
    }

    pub fn turn_shares(&self) -> [(Turn, f64); 3] {
        [
            (Turn::Straight, self.straight_share),
            (Turn::Left, self.left_share),
            (Turn::Right, self.right_share),
        ]
    }

    pub fn max_size(&self) -> u32 {
        self.size_weights.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    /// Lowest speed used in deadlines of slow or stopped arrivals.
    pub crawl_floor: f64,
    pub fcfs_mode: FcfsMode,
    /// Seconds between lane-group selections.
    pub lqf_interval: f64,
    pub clique_cap: usize,
    pub cadence: Cadence,
    /// Groups of mutually compatible movements, e.g. `"N.S+N.R+S.S+S.R"`.
    pub compatible_groups: Vec<String>,
}

impl Default for ControllerSpec {
    fn default() -> Self {
        ControllerSpec {
            kind: ControllerKind::OcPlatoon,
            u_min: -3.0,
            u_max: 3.0,
            v_min: 0.0,
            crawl_floor: 0.5,
            fcfs_mode: FcfsMode::ConflictGated,
            lqf_interval: 5.0,
            clique_cap: 256,
            cadence: Cadence::Events,
            compatible_groups: default_compatible_groups()
                .iter()
                .map(|g| g.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("+"))
                .collect(),
        }
    }
}

impl ControllerSpec {
    pub fn parsed_groups(&self) -> Result<Vec<Vec<Movement>>> {
        self.compatible_groups
            .iter()
            .map(|g| g.split('+').map(str::parse).collect::<Result<Vec<Movement>>>())
            .collect()
    }
}

/// `rate = c0 + c1 v + c2 v² + c3 v³ + max(0, u) v (d0 + d1 v)` per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuelModel {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub d0: f64,
    pub d1: f64,
}

impl Default for FuelModel {
    fn default() -> Self {
        FuelModel {
            c0: 0.1569,
            c1: 0.0245,
            c2: -7.415e-4,
            c3: 5.975e-5,
            d0: 0.09681,
            d1: 0.001075,
        }
    }
}

impl FuelModel {
    pub fn zero() -> Self {
        FuelModel {
            c0: 0.0,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            d0: 0.0,
            d1: 0.0,
        }
    }

    pub fn rate(&self, v: f64, u: f64) -> f64 {
        self.c0 + v * (self.c1 + v * (self.c2 + v * self.c3)) + u.max(0.0) * v * (self.d0 + self.d1 * v)
    }
}

/// Run length, sampling and the axes of an experiment sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Arrivals are generated on `[0, horizon)`.
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    /// Extra time allowed after the horizon for the intersection to empty.
    pub drain_limit: f64,
    /// Platoons longer than this are split; 0 keeps generated sizes.
    pub max_platoon_size: u32,
    pub record_log: bool,
    pub controllers: Vec<ControllerKind>,
    pub max_sizes: Vec<u32>,
    pub seeds: Vec<u64>,
    pub output_dir: String,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            horizon: 900.0,
            dt: 0.1,
            seed: 1,
            drain_limit: 3600.0,
            max_platoon_size: 0,
            record_log: false,
            controllers: ControllerKind::ALL.to_vec(),
            max_sizes: Vec::new(),
            seeds: (1..=10).collect(),
            output_dir: "results".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub geometry: IntersectionGeometry,
    /// An absent section means moderate demand; a present one starts from
    /// zero rates.
    #[serde(default = "DemandSpec::moderate")]
    pub demand: DemandSpec,
    #[serde(default)]
    pub controller: ControllerSpec,
    #[serde(default)]
    pub fuel: FuelModel,
    #[serde(default)]
    pub experiment: ExperimentSpec,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            geometry: IntersectionGeometry::default(),
            demand: DemandSpec::moderate(),
            controller: ControllerSpec::default(),
            fuel: FuelModel::default(),
            experiment: ExperimentSpec::default(),
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::Validation {
        key: key.into(),
        reason: reason.into(),
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate().map_err(|e| match e {
            Error::InvalidGeometry(msg) => invalid("geometry", msg),
            other => other,
        })?;

        let d = &self.demand;
        for (key, rate) in [
            ("demand.rate_n", d.rate_n),
            ("demand.rate_e", d.rate_e),
            ("demand.rate_s", d.rate_s),
            ("demand.rate_w", d.rate_w),
        ] {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(invalid(key, format!("must be a finite rate >= 0, got {rate}")));
            }
        }
        if d.size_weights.is_empty() || d.size_weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(invalid("demand.size_weights", "needs at least one weight, all >= 0"));
        }
        if !(d.size_weights.iter().sum::<f64>() > 0.0) {
            return Err(invalid("demand.size_weights", "weights must not all be zero"));
        }
        for (key, share) in [
            ("demand.straight_share", d.straight_share),
            ("demand.left_share", d.left_share),
            ("demand.right_share", d.right_share),
        ] {
            if !(share >= 0.0) {
                return Err(invalid(key, format!("must be >= 0, got {share}")));
            }
        }
        let total = d.straight_share + d.left_share + d.right_share;
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("demand.straight_share", format!("movement shares must sum to 1, got {total}")));
        }
        if !(d.headway > 0.0) {
            return Err(invalid("demand.headway", format!("must be > 0, got {}", d.headway)));
        }
        if !(d.speed_fraction > 0.0 && d.speed_fraction <= 1.0) {
            return Err(invalid("demand.speed_fraction", format!("must lie in (0, 1], got {}", d.speed_fraction)));
        }

        let c = &self.controller;
        if !(c.u_min < 0.0) {
            return Err(invalid("controller.u_min", format!("must be < 0, got {}", c.u_min)));
        }
        if !(c.u_max > 0.0) {
            return Err(invalid("controller.u_max", format!("must be > 0, got {}", c.u_max)));
        }
        if !(c.v_min >= 0.0 && c.v_min < self.geometry.right_vmax) {
            return Err(invalid("controller.v_min", "must lie in [0, right_vmax)"));
        }
        if !(c.crawl_floor > 0.0) {
            return Err(invalid("controller.crawl_floor", format!("must be > 0, got {}", c.crawl_floor)));
        }
        if !(c.lqf_interval > 0.0) {
            return Err(invalid("controller.lqf_interval", format!("must be > 0, got {}", c.lqf_interval)));
        }
        if c.clique_cap < 1 {
            return Err(invalid("controller.clique_cap", "must be >= 1"));
        }
        let groups = c
            .parsed_groups()
            .map_err(|e| invalid("controller.compatible_groups", e.to_string()))?;
        let table = MovementConflictTable::from_compatible_groups(&groups)
            .map_err(|e| invalid("controller.compatible_groups", e.to_string()))?;
        if let Some(m) = Movement::all().find(|m| !table.covers(*m)) {
            return Err(invalid("controller.compatible_groups", format!("movement {m} is not covered")));
        }

        let x = &self.experiment;
        if !(x.horizon >= 0.0 && x.horizon.is_finite()) {
            return Err(invalid("experiment.horizon", format!("must be >= 0, got {}", x.horizon)));
        }
        if !(x.dt > 0.0) {
            return Err(invalid("experiment.dt", format!("must be > 0, got {}", x.dt)));
        }
        if !(x.drain_limit >= 0.0) {
            return Err(invalid("experiment.drain_limit", "must be >= 0"));
        }
        let mut seeds = x.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != x.seeds.len() {
            return Err(invalid("experiment.seeds", "seeds must be distinct"));
        }
        if x.max_sizes.contains(&0) {
            return Err(invalid("experiment.max_sizes", "sizes must be >= 1"));
        }
        Ok(())
    }

    pub fn conflict_table(&self) -> Result<MovementConflictTable> {
        MovementConflictTable::from_compatible_groups(&self.controller.parsed_groups()?)
    }

    /// Acceleration limits with the straight speed limit as the cap; use
    /// [`ControlBounds::for_route`] for a route-specific cap.
    pub fn bounds(&self) -> ControlBounds {
        ControlBounds {
            u_min: self.controller.u_min,
            u_max: self.controller.u_max,
            v_min: self.controller.v_min,
            v_max: self.geometry.straight_vmax,
        }
    }

    pub fn scheduler_config(&self) -> Result<SchedulerConfig> {
        Ok(SchedulerConfig {
            geometry: self.geometry.clone(),
            conflicts: self.conflict_table()?,
            bounds: self.bounds(),
            crawl_floor: self.controller.crawl_floor,
            clique_cap: self.controller.clique_cap,
        })
    }

    pub fn with_controller(&self, kind: ControllerKind) -> Self {
        let mut s = self.clone();
        s.controller.kind = kind;
        s
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.experiment.seed = seed;
        s
    }
}
