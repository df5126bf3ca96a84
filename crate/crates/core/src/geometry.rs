//! Configuration space, obstacles and path costs.
//!
//! Everything lives in the unit cube `[0,1]^d`. Obstacles and cost regions are
//! axis-aligned boxes, which keeps collision checks and free-space volumes
//! exact. Points on an obstacle boundary are free (the free space is closed).

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Inclusion-exclusion over more overlapping boxes than this is refused.
pub const MAX_OVERLAPPING_OBSTACLES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("expected a point of dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    OutsideUnitCube { index: usize, value: f64 },
    #[error("box is degenerate along axis {axis}: lo = {lo}, hi = {hi}")]
    DegenerateBox { axis: usize, lo: f64, hi: f64 },
    #[error("cost region weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("initial configuration lies inside an obstacle")]
    InitInCollision,
    #[error("goal region has no obstacle-free volume")]
    GoalBlocked,
    #[error("{0} overlapping obstacles exceed the inclusion-exclusion limit of {MAX_OVERLAPPING_OBSTACLES}")]
    TooManyObstacles(usize),
    #[error("a path needs at least one waypoint")]
    EmptyPath,
}

/// Squared Euclidean distance between two coordinate slices.
///
/// Every distance comparison in the crate goes through this function so that
/// the spatial index and its brute-force oracles agree bit for bit.
#[inline]
pub fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        acc += diff * diff;
    }
    acc
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    distance_sq(a, b).sqrt()
}

/// A configuration in the unit cube.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        for (index, &value) in coords.iter().enumerate() {
            if !value.is_finite() {
                return Err(GeometryError::NonFinite { index });
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(GeometryError::OutsideUnitCube { index, value });
            }
        }
        Ok(Self(coords))
    }

    /// Builds a point without the unit-cube check. Used for values produced by
    /// the crate itself (samples, steering results) that are known to be valid.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn splat(d: usize, value: f64) -> Result<Self, GeometryError> {
        Self::new(vec![value; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(&self.0, &other.0)
    }

    /// Lexicographic comparison, used to give symmetric functions a canonical
    /// argument order.
    fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.0).finish()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = GeometryError;

    fn try_from(coords: Vec<f64>) -> Result<Self, Self::Error> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Axis-aligned box `[lo, hi]` inside the unit cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxDoc")]
pub struct Aabb {
    lo: Point,
    hi: Point,
}

#[derive(Deserialize)]
struct BoxDoc {
    lo: Point,
    hi: Point,
}

impl TryFrom<BoxDoc> for Aabb {
    type Error = GeometryError;

    fn try_from(doc: BoxDoc) -> Result<Self, Self::Error> {
        Aabb::new(doc.lo, doc.hi)
    }
}

impl Aabb {
    pub fn new(lo: Point, hi: Point) -> Result<Self, GeometryError> {
        if lo.dim() != hi.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: lo.dim(),
                found: hi.dim(),
            });
        }
        for axis in 0..lo.dim() {
            if !(lo[axis] < hi[axis]) {
                return Err(GeometryError::DegenerateBox {
                    axis,
                    lo: lo[axis],
                    hi: hi[axis],
                });
            }
        }
        Ok(Self { lo, hi })
    }

    /// Convenience constructor from raw corner coordinates.
    pub fn from_corners(lo: &[f64], hi: &[f64]) -> Result<Self, GeometryError> {
        Self::new(Point::new(lo.to_vec())?, Point::new(hi.to_vec())?)
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self, GeometryError> {
        Self::new(Point::splat(d, lo)?, Point::splat(d, hi)?)
    }

    pub fn lo(&self) -> &Point {
        &self.lo
    }

    pub fn hi(&self) -> &Point {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .coords()
            .iter()
            .zip(self.hi.coords())
            .map(|(l, h)| h - l)
            .product()
    }

    pub fn contains_closed(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.coords().iter().zip(self.hi.coords()))
            .all(|(x, (l, h))| *l <= *x && *x <= *h)
    }

    pub fn contains_interior(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.coords().iter().zip(self.hi.coords()))
            .all(|(x, (l, h))| *l < *x && *x < *h)
    }

    /// Intersection with positive volume, if any.
    pub fn intersection(&self, other: &Aabb) -> Option<Aabb> {
        let d = self.dim();
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for axis in 0..d {
            let l = self.lo[axis].max(other.lo[axis]);
            let h = self.hi[axis].min(other.hi[axis]);
            if !(l < h) {
                return None;
            }
            lo.push(l);
            hi.push(h);
        }
        Some(Aabb {
            lo: Point(lo),
            hi: Point(hi),
        })
    }

    /// Parameter range `(t_enter, t_exit)` of the open set of `t` for which
    /// `a + t (b - a)` lies in the box interior, before clamping to `[0, 1]`.
    /// `None` when the supporting line misses the interior.
    fn open_slab_range(&self, a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
        let mut t_enter = f64::NEG_INFINITY;
        let mut t_exit = f64::INFINITY;
        for axis in 0..a.len() {
            let (lo, hi) = (self.lo[axis], self.hi[axis]);
            let dir = b[axis] - a[axis];
            if dir == 0.0 {
                if !(lo < a[axis] && a[axis] < hi) {
                    return None;
                }
                continue;
            }
            let t1 = (lo - a[axis]) / dir;
            let t2 = (hi - a[axis]) / dir;
            let (near, far) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            t_enter = t_enter.max(near);
            t_exit = t_exit.min(far);
            if !(t_enter < t_exit) {
                return None;
            }
        }
        Some((t_enter, t_exit))
    }

    /// True iff the closed segment `[a, b]` meets the open interior of the box.
    pub fn segment_hits_interior(&self, a: &[f64], b: &[f64]) -> bool {
        match self.open_slab_range(a, b) {
            Some((t_enter, t_exit)) => t_enter < 1.0 && t_exit > 0.0,
            None => false,
        }
    }

    /// Sub-range of `t ∈ [0, 1]` spent inside the box, if it has positive length.
    pub fn clip_segment(&self, a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
        let (t_enter, t_exit) = self.open_slab_range(a, b)?;
        let (t0, t1) = (t_enter.max(0.0), t_exit.min(1.0));
        (t0 < t1).then_some((t0, t1))
    }
}

/// A box with a traversal weight; the cost field is 1 outside every region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CostRegionDoc", into = "CostRegionDoc")]
pub struct CostRegion {
    pub region: Aabb,
    pub weight: f64,
}

#[derive(Serialize, Deserialize)]
struct CostRegionDoc {
    lo: Point,
    hi: Point,
    weight: f64,
}

impl TryFrom<CostRegionDoc> for CostRegion {
    type Error = GeometryError;

    fn try_from(doc: CostRegionDoc) -> Result<Self, Self::Error> {
        CostRegion::new(Aabb::new(doc.lo, doc.hi)?, doc.weight)
    }
}

impl From<CostRegion> for CostRegionDoc {
    fn from(c: CostRegion) -> Self {
        CostRegionDoc {
            lo: c.region.lo,
            hi: c.region.hi,
            weight: c.weight,
        }
    }
}

impl CostRegion {
    pub fn new(region: Aabb, weight: f64) -> Result<Self, GeometryError> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(GeometryError::InvalidWeight(weight));
        }
        Ok(Self { region, weight })
    }
}

/// A path planning problem: dimension, obstacles, start, goal and cost field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioDoc", into = "ScenarioDoc")]
pub struct Scenario {
    d: usize,
    obstacles: Vec<Aabb>,
    x_init: Point,
    goal: Aabb,
    cost_regions: Vec<CostRegion>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioDoc {
    d: usize,
    #[serde(default)]
    obstacles: Vec<Aabb>,
    x_init: Point,
    goal: Aabb,
    #[serde(default)]
    cost_regions: Vec<CostRegion>,
}

impl TryFrom<ScenarioDoc> for Scenario {
    type Error = GeometryError;

    fn try_from(doc: ScenarioDoc) -> Result<Self, Self::Error> {
        Scenario::new(doc.d, doc.obstacles, doc.x_init, doc.goal, doc.cost_regions)
    }
}

impl From<Scenario> for ScenarioDoc {
    fn from(s: Scenario) -> Self {
        ScenarioDoc {
            d: s.d,
            obstacles: s.obstacles,
            x_init: s.x_init,
            goal: s.goal,
            cost_regions: s.cost_regions,
        }
    }
}

impl Scenario {
    pub fn new(
        d: usize,
        obstacles: Vec<Aabb>,
        x_init: Point,
        goal: Aabb,
        cost_regions: Vec<CostRegion>,
    ) -> Result<Self, GeometryError> {
        if d < 2 {
            return Err(GeometryError::DimensionTooSmall(d));
        }
        let check = |found: usize| {
            if found == d {
                Ok(())
            } else {
                Err(GeometryError::DimensionMismatch { expected: d, found })
            }
        };
        check(x_init.dim())?;
        check(goal.dim())?;
        for b in &obstacles {
            check(b.dim())?;
        }
        for c in &cost_regions {
            check(c.region.dim())?;
        }
        let scenario = Self {
            d,
            obstacles,
            x_init,
            goal,
            cost_regions,
        };
        if !scenario.point_in_free(scenario.x_init.coords()) {
            return Err(GeometryError::InitInCollision);
        }
        let clipped: Vec<Aabb> = scenario
            .obstacles
            .iter()
            .filter_map(|o| o.intersection(&scenario.goal))
            .collect();
        if scenario.goal.volume() - union_volume(&clipped)? <= 0.0 {
            return Err(GeometryError::GoalBlocked);
        }
        Ok(scenario)
    }

    /// Obstacle-free unit cube with Euclidean cost.
    pub fn open(d: usize, x_init: Point, goal: Aabb) -> Result<Self, GeometryError> {
        Self::new(d, Vec::new(), x_init, goal, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn obstacles(&self) -> &[Aabb] {
        &self.obstacles
    }

    pub fn x_init(&self) -> &Point {
        &self.x_init
    }

    pub fn goal(&self) -> &Aabb {
        &self.goal
    }

    pub fn cost_regions(&self) -> &[CostRegion] {
        &self.cost_regions
    }

    /// True iff `p` lies in no obstacle interior.
    pub fn point_in_free(&self, p: &[f64]) -> bool {
        !self.obstacles.iter().any(|o| o.contains_interior(p))
    }

    /// Goal membership uses the closed goal box.
    pub fn in_goal(&self, p: &[f64]) -> bool {
        self.goal.contains_closed(p)
    }

    /// True iff the closed segment `[a, b]` avoids every obstacle interior.
    pub fn segment_collision_free(&self, a: &[f64], b: &[f64]) -> bool {
        !self.obstacles.iter().any(|o| o.segment_hits_interior(a, b))
    }

    /// Exact Lebesgue measure of the free space.
    pub fn free_space_measure(&self) -> Result<f64, GeometryError> {
        Ok(1.0 - union_volume(&self.obstacles)?)
    }

    /// Largest value of the cost field; bounds cost by this factor times length.
    pub fn max_weight(&self) -> f64 {
        self.cost_regions.iter().map(|c| c.weight).fold(1.0, f64::max)
    }

    /// Weight of the cost field at `p`. Overlapping regions resolve to the
    /// first one listed.
    pub fn weight_at(&self, p: &[f64]) -> f64 {
        self.cost_regions
            .iter()
            .find(|c| c.region.contains_closed(p))
            .map_or(1.0, |c| c.weight)
    }

    /// Cost of the straight segment between `a` and `b`: the line integral of
    /// the cost field, which is plain Euclidean length without cost regions.
    ///
    /// Symmetric bit for bit in its arguments.
    pub fn segment_cost(&self, a: &Point, b: &Point) -> f64 {
        let (a, b) = if a.lex_cmp(b) == Ordering::Greater {
            (b, a)
        } else {
            (a, b)
        };
        line_integral_cost(a.coords(), b.coords(), &self.cost_regions)
    }
}

/// Line integral of a piecewise-constant cost field along `[a, b]`.
///
/// The segment is split at every region boundary crossing; each piece takes the
/// weight found at its midpoint.
pub fn line_integral_cost(a: &[f64], b: &[f64], regions: &[CostRegion]) -> f64 {
    let length = distance(a, b);
    if regions.is_empty() || length == 0.0 {
        return length;
    }
    let mut cuts = vec![0.0, 1.0];
    for c in regions {
        if let Some((t0, t1)) = c.region.clip_segment(a, b) {
            cuts.push(t0);
            cuts.push(t1);
        }
    }
    if cuts.len() == 2 {
        return length;
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut mid = vec![0.0; a.len()];
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let tm = 0.5 * (t0 + t1);
        for (m, (x, y)) in mid.iter_mut().zip(a.iter().zip(b)) {
            *m = x + tm * (y - x);
        }
        let weight = regions
            .iter()
            .find(|c| c.region.contains_closed(&mid))
            .map_or(1.0, |c| c.weight);
        total += weight * (t1 - t0) * length;
    }
    total
}

/// Volume of a union of boxes.
///
/// Pairwise-disjoint boxes are summed directly; otherwise inclusion-exclusion is
/// used, which is exponential and therefore capped.
pub fn union_volume(boxes: &[Aabb]) -> Result<f64, GeometryError> {
    let disjoint = boxes
        .iter()
        .enumerate()
        .all(|(i, a)| boxes[i + 1..].iter().all(|b| a.intersection(b).is_none()));
    if disjoint {
        return Ok(boxes.iter().map(Aabb::volume).sum());
    }
    if boxes.len() > MAX_OVERLAPPING_OBSTACLES {
        return Err(GeometryError::TooManyObstacles(boxes.len()));
    }

    fn descend(boxes: &[Aabb], start: usize, acc: &Aabb, sign: f64, total: &mut f64) {
        for (j, b) in boxes.iter().enumerate().skip(start) {
            if let Some(meet) = acc.intersection(b) {
                *total += sign * meet.volume();
                descend(boxes, j + 1, &meet, -sign, total);
            }
        }
    }

    let mut total = 0.0;
    for (i, b) in boxes.iter().enumerate() {
        total += b.volume();
        descend(boxes, i + 1, b, -1.0, &mut total);
    }
    Ok(total)
}

/// Volume of the unit ball in `d` dimensions, `π^(d/2) / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // ζ_d = ζ_{d-2} · 2π / d, seeded with ζ_0 = 1 and ζ_1 = 2.
    let even = d.is_multiple_of(2);
    let mut vol = if even { 1.0 } else { 2.0 };
    let mut k = if even { 2 } else { 3 };
    while k <= d {
        vol *= 2.0 * PI / k as f64;
        k += 2;
    }
    vol
}

/// A polyline path through the configuration space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPolyline {
    waypoints: Vec<Point>,
}

impl PathPolyline {
    pub fn new(waypoints: Vec<Point>) -> Result<Self, GeometryError> {
        let first = waypoints.first().ok_or(GeometryError::EmptyPath)?;
        let d = first.dim();
        if let Some(bad) = waypoints.iter().find(|p| p.dim() != d) {
            return Err(GeometryError::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(Self { waypoints })
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    pub fn start(&self) -> &Point {
        &self.waypoints[0]
    }

    pub fn end(&self) -> &Point {
        self.waypoints.last().expect("non-empty by construction")
    }

    /// Total variation, which for a polyline is the sum of segment lengths.
    pub fn total_variation(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// Cost under the scenario's cost field.
    pub fn cost(&self, scenario: &Scenario) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| scenario.segment_cost(&w[0], &w[1]))
            .sum()
    }

    /// `self` followed by `other`. When `other` starts where `self` ends the
    /// shared waypoint is kept once.
    pub fn concat(&self, other: &PathPolyline) -> PathPolyline {
        let mut waypoints = self.waypoints.clone();
        let skip = usize::from(self.end() == other.start());
        waypoints.extend(other.waypoints.iter().skip(skip).cloned());
        PathPolyline { waypoints }
    }
}
