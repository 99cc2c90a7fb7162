//! Intersection layout, in-zone path lengths, movement speed limits and the
//! movement conflict relation.
//!
//! Distances along a turn are measured on the vehicle centerline. A vehicle's
//! lateral position is expressed in half-lane units counted from the right
//! (`H_r`) and left (`H_l`) edges of the approach road, so `H_r + H_l = 2W`
//! where `W` is the lane count across the road.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Approach {
    #[serde(rename = "N")]
    North,
    #[serde(rename = "E")]
    East,
    #[serde(rename = "S")]
    South,
    #[serde(rename = "W")]
    West,
}

impl Approach {
    pub const ALL: [Approach; 4] = [Approach::North, Approach::East, Approach::South, Approach::West];

    pub fn index(self) -> usize {
        match self {
            Approach::North => 0,
            Approach::East => 1,
            Approach::South => 2,
            Approach::West => 3,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Approach::North => 'N',
            Approach::East => 'E',
            Approach::South => 'S',
            Approach::West => 'W',
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "N" | "n" => Ok(Approach::North),
            "E" | "e" => Ok(Approach::East),
            "S" | "s" => Ok(Approach::South),
            "W" | "w" => Ok(Approach::West),
            other => Err(Error::Parse(format!("unknown approach `{other}`"))),
        }
    }
}

/// Routing decision taken inside the merging zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Turn {
    Straight,
    Left,
    Right,
}

impl Turn {
    pub const ALL: [Turn; 3] = [Turn::Straight, Turn::Left, Turn::Right];

    pub fn index(self) -> usize {
        match self {
            Turn::Straight => 0,
            Turn::Left => 1,
            Turn::Right => 2,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Turn::Straight => 'S',
            Turn::Left => 'L',
            Turn::Right => 'R',
        }
    }

    /// Lane (counted from the right curb) dedicated to this decision in the
    /// default layout: right turns on the curb lane, left turns innermost.
    pub fn default_lane(self) -> u32 {
        match self {
            Turn::Right => 1,
            Turn::Straight => 2,
            Turn::Left => 3,
        }
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// An (approach, decision) pair. A four-leg intersection has twelve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Movement {
    pub approach: Approach,
    pub turn: Turn,
}

impl Movement {
    pub const COUNT: usize = 12;

    pub fn new(approach: Approach, turn: Turn) -> Self {
        Movement { approach, turn }
    }

    pub fn index(self) -> usize {
        self.approach.index() * 3 + self.turn.index()
    }

    pub fn all() -> impl Iterator<Item = Movement> {
        Approach::ALL
            .into_iter()
            .flat_map(|a| Turn::ALL.into_iter().map(move |t| Movement::new(a, t)))
    }

    /// Lane number of this movement in the twelve-lane layout used by the
    /// lane-group baseline (lanes 1..=12, numbered around the intersection).
    pub fn lane_number(self) -> u8 {
        use Approach::*;
        use Turn::*;
        match (self.approach, self.turn) {
            (North, Left) => 1,
            (North, Straight) => 2,
            (North, Right) => 3,
            (South, Left) => 4,
            (South, Straight) => 5,
            (South, Right) => 6,
            (East, Left) => 7,
            (East, Straight) => 8,
            (East, Right) => 9,
            (West, Right) => 10,
            (West, Straight) => 11,
            (West, Left) => 12,
        }
    }
}

impl fmt::Display for Movement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.approach, self.turn)
    }
}

impl FromStr for Movement {
    type Err = Error;

    /// Parses `N.S`, `E.L`, `W.R`, ...
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (a, t) = s
            .split_once('.')
            .ok_or_else(|| Error::Parse(format!("movement `{s}` is not of the form <approach>.<S|L|R>")))?;
        let turn = match t.trim() {
            "S" | "s" => Turn::Straight,
            "L" | "l" => Turn::Left,
            "R" | "r" => Turn::Right,
            other => return Err(Error::Parse(format!("unknown turn `{other}` in movement `{s}`"))),
        };
        Ok(Movement::new(a.parse()?, turn))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntersectionGeometry {
    /// Distance from schedule-zone entry to merging-zone entry.
    pub schedule_zone_length: f64,
    pub merging_zone_side: f64,
    /// Lane count across the approach road, used for half-lane offsets.
    pub lanes_per_approach: u32,
    pub lane_width: f64,
    pub clearance_time: f64,
    pub superelevation: f64,
    pub side_friction: f64,
    pub straight_vmax: f64,
    pub left_vmax: f64,
    pub right_vmax: f64,
}

impl Default for IntersectionGeometry {
    fn default() -> Self {
        IntersectionGeometry {
            schedule_zone_length: 200.0,
            merging_zone_side: 50.0,
            lanes_per_approach: 6,
            lane_width: 3.5,
            clearance_time: 1.0,
            superelevation: 0.0,
            side_friction: 0.15,
            straight_vmax: 18.0,
            left_vmax: 9.0,
            right_vmax: 7.0,
        }
    }
}

impl IntersectionGeometry {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGeometry(msg));
        if !(self.schedule_zone_length > 0.0) {
            return bad(format!("schedule_zone_length must be > 0, got {}", self.schedule_zone_length));
        }
        if !(self.merging_zone_side > 0.0) {
            return bad(format!("merging_zone_side must be > 0, got {}", self.merging_zone_side));
        }
        if self.lanes_per_approach < 1 {
            return bad("lanes_per_approach must be >= 1".into());
        }
        if !(self.lane_width > 0.0) {
            return bad(format!("lane_width must be > 0, got {}", self.lane_width));
        }
        if !(self.clearance_time >= 0.0) {
            return bad(format!("clearance_time must be >= 0, got {}", self.clearance_time));
        }
        if !(self.superelevation >= 0.0 && self.side_friction >= 0.0) {
            return bad("superelevation and side_friction must be >= 0".into());
        }
        if !(0.0 < self.right_vmax && self.right_vmax <= self.left_vmax && self.left_vmax <= self.straight_vmax) {
            return bad(format!(
                "speed limits must satisfy 0 < right ({}) <= left ({}) <= straight ({})",
                self.right_vmax, self.left_vmax, self.straight_vmax
            ));
        }
        Ok(())
    }

    /// Half of a lane width.
    pub fn half_lane(&self) -> f64 {
        self.lane_width / 2.0
    }

    /// Replaces the turning speed limits with the curve formula evaluated at
    /// the given centerline radii, never exceeding the straight limit.
    pub fn with_turn_limits_from_radii(mut self, left_radius: f64, right_radius: f64) -> Result<Self> {
        let factor = (self.superelevation, self.side_friction);
        self.left_vmax = turn_speed_limit(left_radius, factor.0, factor.1)?.min(self.straight_vmax);
        self.right_vmax = turn_speed_limit(right_radius, factor.0, factor.1)?.min(self.left_vmax);
        self.validate()?;
        Ok(self)
    }
}

/// A platoon's path through the intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Route {
    pub approach: Approach,
    /// 1-based lane index counted from the right curb.
    pub lane_index: u32,
    pub decision: Turn,
    pub half_lanes_right: u32,
    pub half_lanes_left: u32,
}

impl Route {
    /// Builds a route whose half-lane offsets follow from the lane index:
    /// the centerline of lane `k` sits `2k - 1` half lanes from the right edge.
    pub fn new(approach: Approach, lane_index: u32, decision: Turn, lanes: u32) -> Result<Self> {
        if lane_index < 1 || lane_index > lanes {
            return Err(Error::InvalidGeometry(format!(
                "lane index {lane_index} outside 1..={lanes}"
            )));
        }
        let half_lanes_right = 2 * lane_index - 1;
        Ok(Route {
            approach,
            lane_index,
            decision,
            half_lanes_right,
            half_lanes_left: 2 * lanes - half_lanes_right,
        })
    }

    /// Route on the lane dedicated to `turn` in the default layout.
    pub fn for_movement(movement: Movement, geom: &IntersectionGeometry) -> Result<Self> {
        Route::new(movement.approach, movement.turn.default_lane(), movement.turn, geom.lanes_per_approach)
    }

    pub fn movement(&self) -> Movement {
        Movement::new(self.approach, self.decision)
    }

    pub fn validate(&self, geom: &IntersectionGeometry) -> Result<()> {
        let w = geom.lanes_per_approach;
        if self.lane_index < 1 || self.lane_index > w {
            return Err(Error::InvalidGeometry(format!(
                "lane index {} outside 1..={w}",
                self.lane_index
            )));
        }
        if self.half_lanes_right + self.half_lanes_left != 2 * w {
            return Err(Error::InvalidGeometry(format!(
                "half-lane offsets H_r={} and H_l={} do not sum to 2W={}",
                self.half_lanes_right,
                self.half_lanes_left,
                2 * w
            )));
        }
        Ok(())
    }
}

/// Length of a circular arc subtending `theta_degrees` at radius `r`.
pub fn arc_length(theta_degrees: f64, r: f64) -> Result<f64> {
    if !(theta_degrees > 0.0 && theta_degrees <= 360.0) {
        return Err(Error::InvalidGeometry(format!("arc angle {theta_degrees} outside (0, 360]")));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidGeometry(format!("arc radius must be > 0, got {r}")));
    }
    Ok(theta_degrees / 360.0 * (2.0 * PI * r))
}

/// Distance travelled inside the merging zone.
pub fn merging_distance(route: &Route, geom: &IntersectionGeometry) -> Result<f64> {
    route.validate(geom)?;
    let m = geom.merging_zone_side;
    let two_w = 2.0 * geom.lanes_per_approach as f64;
    Ok(match route.decision {
        Turn::Straight => m,
        Turn::Left => (1.0 - route.half_lanes_right as f64 / two_w) * PI * m,
        Turn::Right => (1.0 - route.half_lanes_left as f64 / two_w) * PI * m,
    })
}

/// Centerline radius of the quarter-circle turn implied by the in-zone path.
pub fn implied_turn_radius(route: &Route, geom: &IntersectionGeometry) -> Result<f64> {
    let d = merging_distance(route, geom)?;
    match route.decision {
        Turn::Straight => Err(Error::InvalidGeometry("a straight route has no turning radius".into())),
        _ => Ok(2.0 * d / PI),
    }
}

/// Highest comfortable speed on a curve of radius `radius` with the given
/// superelevation and side friction factor.
pub fn turn_speed_limit(radius: f64, superelevation: f64, side_friction: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidGeometry(format!("turn radius must be > 0, got {radius}")));
    }
    if !(superelevation >= 0.0 && side_friction >= 0.0) {
        return Err(Error::InvalidGeometry("superelevation and side friction must be >= 0".into()));
    }
    Ok((15.0 * radius * (0.1 * superelevation + side_friction)).sqrt())
}

pub fn route_vmax(route: &Route, geom: &IntersectionGeometry) -> f64 {
    turn_vmax(route.decision, geom)
}

pub fn turn_vmax(turn: Turn, geom: &IntersectionGeometry) -> f64 {
    match turn {
        Turn::Straight => geom.straight_vmax,
        Turn::Left => geom.left_vmax,
        Turn::Right => geom.right_vmax,
    }
}

/// Symmetric path-conflict relation over the twelve movements.
///
/// A movement always conflicts with itself: two platoons on the same movement
/// share a lane queue and may not occupy the merging zone together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovementConflictTable {
    known: [bool; Movement::COUNT],
    conflict: [[bool; Movement::COUNT]; Movement::COUNT],
}

impl MovementConflictTable {
    /// Builds the table from groups of mutually compatible movements. Two
    /// distinct movements are compatible iff some group contains both.
    /// Movements not named by any group are absent from the table.
    pub fn from_compatible_groups(groups: &[Vec<Movement>]) -> Result<Self> {
        let mut known = [false; Movement::COUNT];
        let mut conflict = [[true; Movement::COUNT]; Movement::COUNT];
        for group in groups {
            for (k, a) in group.iter().enumerate() {
                known[a.index()] = true;
                for b in &group[k + 1..] {
                    if a == b {
                        return Err(Error::Configuration(format!("movement {a} listed twice in one group")));
                    }
                    conflict[a.index()][b.index()] = false;
                    conflict[b.index()][a.index()] = false;
                }
            }
        }
        Ok(MovementConflictTable { known, conflict })
    }

    /// Four-leg intersection where opposing through and right movements run
    /// together and opposing left turns run together.
    pub fn four_leg_default() -> Self {
        Self::from_compatible_groups(&default_compatible_groups()).expect("default groups are well formed")
    }

    pub fn covers(&self, m: Movement) -> bool {
        self.known[m.index()]
    }

    pub fn conflicts_movements(&self, a: Movement, b: Movement) -> Result<bool> {
        for m in [a, b] {
            if !self.covers(m) {
                return Err(Error::Configuration(format!("movement {m} is not in the conflict table")));
            }
        }
        Ok(self.conflict[a.index()][b.index()])
    }

    /// Unchecked lookup for movements already validated against the table.
    #[inline]
    pub fn conflict_by_index(&self, a: usize, b: usize) -> bool {
        self.conflict[a][b]
    }
}

impl Default for MovementConflictTable {
    fn default() -> Self {
        Self::four_leg_default()
    }
}

pub fn default_compatible_groups() -> Vec<Vec<Movement>> {
    use Approach::*;
    use Turn::*;
    let m = Movement::new;
    vec![
        vec![m(North, Straight), m(North, Right), m(South, Straight), m(South, Right)],
        vec![m(North, Left), m(South, Left)],
        vec![m(East, Straight), m(East, Right), m(West, Straight), m(West, Right)],
        vec![m(East, Left), m(West, Left)],
    ]
}

pub fn conflicts(route_a: &Route, route_b: &Route, table: &MovementConflictTable) -> Result<bool> {
    table.conflicts_movements(route_a.movement(), route_b.movement())
}
