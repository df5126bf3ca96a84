//! The planner family: PRM, the simplified batch PRM and its neighbor-rule
//! variants, RRT, and the asymptotically optimal PRM*, RRG and RRT* with their
//! k-nearest counterparts.
//!
//! Every planner consumes a [`Scenario`], a [`PlannerSpec`] and an
//! [`RngStream`], and returns the graph it built together with a [`RunTrace`].

mod batch;
mod incremental;

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{unit_ball_volume, GeometryError, Point, Scenario};
use crate::graph::{GraphError, RoadmapGraph};
use crate::sampling::{RngStream, SamplingError};
use crate::spatial::IndexError;

pub use batch::{build_prm, build_prm_star, build_sprm};
pub use incremental::{build_rrg, build_rrt, build_rrt_star, IncrementalPlanner, StepOutcome};

/// Default neighbor count of k-nearest sPRM.
pub const DEFAULT_K_NEAREST: usize = 15;
/// Default degree bound of bounded-degree sPRM.
pub const DEFAULT_DEGREE_BOUND: usize = 20;
pub const DEFAULT_GAMMA_FACTOR: f64 = 1.1;
pub const DEFAULT_K_FACTOR: f64 = 1.1;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid planner spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "PRM")]
    Prm,
    #[serde(rename = "sPRM")]
    SPrm,
    #[serde(rename = "kSPRM")]
    KSPrm,
    #[serde(rename = "boundedDegreeSPRM")]
    BoundedDegreeSPrm,
    #[serde(rename = "variableRadiusSPRM")]
    VariableRadiusSPrm,
    #[serde(rename = "RRT")]
    Rrt,
    #[serde(rename = "PRMstar")]
    PrmStar,
    #[serde(rename = "kPRMstar")]
    KPrmStar,
    #[serde(rename = "RRG")]
    Rrg,
    #[serde(rename = "kRRG")]
    KRrg,
    #[serde(rename = "RRTstar")]
    RrtStar,
    #[serde(rename = "kRRTstar")]
    KRrtStar,
}

impl Algorithm {
    pub const ALL: [Algorithm; 12] = [
        Algorithm::Prm,
        Algorithm::SPrm,
        Algorithm::KSPrm,
        Algorithm::BoundedDegreeSPrm,
        Algorithm::VariableRadiusSPrm,
        Algorithm::Rrt,
        Algorithm::PrmStar,
        Algorithm::KPrmStar,
        Algorithm::Rrg,
        Algorithm::KRrg,
        Algorithm::RrtStar,
        Algorithm::KRrtStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Prm => "PRM",
            Algorithm::SPrm => "sPRM",
            Algorithm::KSPrm => "kSPRM",
            Algorithm::BoundedDegreeSPrm => "boundedDegreeSPRM",
            Algorithm::VariableRadiusSPrm => "variableRadiusSPRM",
            Algorithm::Rrt => "RRT",
            Algorithm::PrmStar => "PRMstar",
            Algorithm::KPrmStar => "kPRMstar",
            Algorithm::Rrg => "RRG",
            Algorithm::KRrg => "kRRG",
            Algorithm::RrtStar => "RRTstar",
            Algorithm::KRrtStar => "kRRTstar",
        }
    }

    /// Algorithms whose connection rule scales with a critical constant.
    pub fn is_starred(self) -> bool {
        matches!(
            self,
            Algorithm::PrmStar
                | Algorithm::KPrmStar
                | Algorithm::Rrg
                | Algorithm::KRrg
                | Algorithm::RrtStar
                | Algorithm::KRrtStar
        )
    }

    /// Incremental planners grow one sample per iteration; the others build a
    /// roadmap over a batch of samples.
    pub fn is_incremental(self) -> bool {
        matches!(
            self,
            Algorithm::Prm
                | Algorithm::Rrt
                | Algorithm::Rrg
                | Algorithm::KRrg
                | Algorithm::RrtStar
                | Algorithm::KRrtStar
        )
    }

    /// Whether the best-cost series is guaranteed not to increase with the
    /// iteration count.
    pub fn has_monotone_cost(self) -> bool {
        !matches!(
            self,
            Algorithm::KSPrm
                | Algorithm::BoundedDegreeSPrm
                | Algorithm::VariableRadiusSPrm
                | Algorithm::PrmStar
                | Algorithm::KPrmStar
        )
    }

    fn needs_radius(self) -> bool {
        matches!(self, Algorithm::Prm | Algorithm::SPrm | Algorithm::BoundedDegreeSPrm)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| PlanError::Spec(format!("unknown algorithm {s:?}")))
    }
}

/// Which lower bound the RRT* connection constants are scaled from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RrtStarConstants {
    /// The RRG bounds `γ*_RRG = 2 (1+1/d)^{1/d} (μ/ζ_d)^{1/d}` and
    /// `k*_RRG = e (1 + 1/d)`.
    #[default]
    Graph,
    /// The tree-specific bounds `(2 (1+1/d))^{1/d} (μ/ζ_d)^{1/d}` and
    /// `2^{d+1} e (1 + 1/d)`.
    Tree,
}

/// Algorithm choice and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerSpec {
    pub algorithm: Algorithm,
    /// Iteration budget (incremental planners) or sample count (batch).
    pub n: usize,
    /// Fixed connection radius for PRM, sPRM and bounded-degree sPRM.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Neighbor count for k-nearest and bounded-degree sPRM.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Multiplier on the critical radius constant.
    #[serde(default = "default_gamma_factor")]
    pub gamma_factor: f64,
    /// Multiplier on the critical neighbor-count constant.
    #[serde(default = "default_k_factor")]
    pub k_factor: f64,
    /// Steering range; defaults to the cube diameter `√d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// `γ` of variable-radius sPRM, whose radius is `γ n^{-1/d}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_gamma: Option<f64>,
    #[serde(default)]
    pub rrt_star_constants: RrtStarConstants,
    #[serde(default)]
    pub seed: u64,
}

fn default_gamma_factor() -> f64 {
    DEFAULT_GAMMA_FACTOR
}

fn default_k_factor() -> f64 {
    DEFAULT_K_FACTOR
}

impl PlannerSpec {
    pub fn new(algorithm: Algorithm, n: usize) -> Self {
        Self {
            algorithm,
            n,
            radius: None,
            k: None,
            gamma_factor: DEFAULT_GAMMA_FACTOR,
            k_factor: DEFAULT_K_FACTOR,
            eta: None,
            radius_gamma: None,
            rrt_star_constants: RrtStarConstants::default(),
            seed: 0,
        }
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_gamma_factor(mut self, f: f64) -> Self {
        self.gamma_factor = f;
        self
    }

    pub fn with_k_factor(mut self, f: f64) -> Self {
        self.k_factor = f;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn with_radius_gamma(mut self, gamma: f64) -> Self {
        self.radius_gamma = Some(gamma);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// A short label such as `kSPRM(k=15)` for reports.
    pub fn label(&self) -> String {
        match self.algorithm {
            Algorithm::KSPrm => format!("kSPRM(k={})", self.neighbor_count()),
            Algorithm::BoundedDegreeSPrm => format!("boundedDegreeSPRM(k={})", self.neighbor_count()),
            a => a.name().to_string(),
        }
    }

    pub fn eta_for(&self, d: usize) -> f64 {
        self.eta.unwrap_or((d as f64).sqrt())
    }

    pub(crate) fn neighbor_count(&self) -> usize {
        self.k.unwrap_or(match self.algorithm {
            Algorithm::BoundedDegreeSPrm => DEFAULT_DEGREE_BOUND,
            _ => DEFAULT_K_NEAREST,
        })
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: String| Err(PlanError::Spec(m));
        if self.algorithm.is_starred() {
            if !(self.gamma_factor > 1.0 && self.gamma_factor.is_finite()) {
                return bad(format!("gamma_factor must exceed 1, got {}", self.gamma_factor));
            }
            if !(self.k_factor > 1.0 && self.k_factor.is_finite()) {
                return bad(format!("k_factor must exceed 1, got {}", self.k_factor));
            }
        }
        if self.algorithm.needs_radius() {
            match self.radius {
                Some(r) if r > 0.0 && r.is_finite() => {}
                Some(r) => return bad(format!("radius must be positive, got {r}")),
                None => return bad(format!("{} requires a radius", self.algorithm)),
            }
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0) {
                return bad(format!("eta must be positive, got {eta}"));
            }
        }
        if matches!(self.algorithm, Algorithm::KSPrm | Algorithm::BoundedDegreeSPrm) && self.neighbor_count() == 0 {
            return bad("k must be at least 1".into());
        }
        if self.algorithm == Algorithm::VariableRadiusSPrm {
            match self.radius_gamma {
                Some(g) if g > 0.0 && g.is_finite() => {}
                _ => return bad("variableRadiusSPRM requires a positive radius_gamma".into()),
            }
        }
        Ok(())
    }
}

/// Critical radius constant of PRM* and RRG,
/// `2 (1 + 1/d)^{1/d} (μ(X_free) / ζ_d)^{1/d}`.
pub fn gamma_star_prm(d: usize, mu_free: f64) -> f64 {
    let inv_d = 1.0 / d as f64;
    2.0 * (1.0 + inv_d).powf(inv_d) * (mu_free / unit_ball_volume(d)).powf(inv_d)
}

/// Tree-specific radius bound, `(2 (1 + 1/d))^{1/d} (μ(X_free) / ζ_d)^{1/d}`.
pub fn gamma_star_rrt_tree(d: usize, mu_free: f64) -> f64 {
    let inv_d = 1.0 / d as f64;
    (2.0 * (1.0 + inv_d)).powf(inv_d) * (mu_free / unit_ball_volume(d)).powf(inv_d)
}

/// Critical neighbor-count coefficient `e (1 + 1/d)`.
pub fn k_star(d: usize) -> f64 {
    E * (1.0 + 1.0 / d as f64)
}

/// Tree-specific neighbor-count bound `2^{d+1} e (1 + 1/d)`.
pub fn k_star_rrt_tree(d: usize) -> f64 {
    2f64.powi(d as i32 + 1) * k_star(d)
}

/// The `k_factor` at which the neighbor coefficient equals `2e`, a choice
/// valid for every problem instance.
pub fn k_factor_for_two_e(d: usize) -> f64 {
    2.0 * E / k_star(d)
}

/// PRM* connection radius `gamma_factor · γ* · (ln n / n)^{1/d}`.
pub fn radius_prm_star(card: usize, d: usize, mu_free: f64, gamma_factor: f64) -> Result<f64, PlanError> {
    if card < 2 {
        return Err(PlanError::Spec(format!("radius needs at least 2 samples, got {card}")));
    }
    let n = card as f64;
    Ok(gamma_factor * gamma_star_prm(d, mu_free) * (n.ln() / n).powf(1.0 / d as f64))
}

/// Neighbor count `ceil(k_factor · e (1 + 1/d) · ln n)`, at least 1.
pub fn k_of_n(card: usize, d: usize, k_factor: f64) -> usize {
    k_from_coefficient(card, k_factor * k_star(d))
}

pub(crate) fn k_from_coefficient(card: usize, coefficient: f64) -> usize {
    if card < 2 {
        return 1;
    }
    ((coefficient * (card as f64).ln()).ceil() as usize).max(1)
}

/// The point closest to `y` within distance `eta` of `x`.
pub fn steer(x: &Point, y: &Point, eta: f64) -> Point {
    let dist = x.distance(y);
    if dist <= eta {
        return y.clone();
    }
    let scale = eta / dist;
    Point::from_vec_unchecked(
        x.coords()
            .iter()
            .zip(y.coords())
            .map(|(a, b)| a + scale * (b - a))
            .collect(),
    )
}

/// When to record trace rows.
#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    /// After every iteration of an incremental planner. Batch planners record
    /// only the final roadmap under this schedule.
    EveryIteration,
    /// At the listed iteration counts (sorted, deduplicated, clipped to
    /// `[1, n]`). Batch planners rebuild the roadmap over each sample prefix.
    At(Vec<usize>),
}

impl Schedule {
    /// `count` logarithmically spaced checkpoints in `[1, n]`, always ending at `n`.
    pub fn log_spaced(n: usize, count: usize) -> Self {
        Schedule::At(log_spaced(n, count))
    }

    pub(crate) fn checkpoints(&self, n: usize) -> Vec<usize> {
        match self {
            Schedule::EveryIteration => (1..=n).collect(),
            Schedule::At(list) => {
                let mut v: Vec<usize> = list.iter().copied().filter(|&i| i >= 1 && i <= n).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    pub(crate) fn batch_checkpoints(&self, n: usize) -> Vec<usize> {
        match self {
            Schedule::EveryIteration => vec![n],
            Schedule::At(_) => self.checkpoints(n),
        }
    }
}

pub fn log_spaced(n: usize, count: usize) -> Vec<usize> {
    if n == 0 || count == 0 {
        return Vec::new();
    }
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = if count == 1 { 1.0 } else { i as f64 / (count - 1) as f64 };
            ((n as f64).powf(t).round() as usize).clamp(1, n)
        })
        .collect();
    out.push(n);
    out.sort_unstable();
    out.dedup();
    out
}

/// One trace row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    /// Cost of the best goal-reaching path, `+∞` when none exists yet.
    pub best_cost: f64,
    /// Seconds since the run started (batch: time to build this prefix).
    pub elapsed_s: f64,
    /// Cumulative collision-check calls.
    pub collision_checks: u64,
}

/// What a planner run recorded.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunTrace {
    pub points: Vec<TracePoint>,
    pub collision_checks: u64,
    /// Collision checks that found the segment free.
    pub free_checks: u64,
    /// Directed edges inserted into the output graph.
    pub edges_added: u64,
}

impl RunTrace {
    pub fn best_costs(&self) -> Vec<(usize, f64)> {
        self.points.iter().map(|p| (p.iteration, p.best_cost)).collect()
    }

    pub fn final_cost(&self) -> f64 {
        self.points.last().map_or(f64::INFINITY, |p| p.best_cost)
    }

    pub fn cost_at(&self, iteration: usize) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.iteration == iteration)
            .map(|p| p.best_cost)
    }
}

/// Graph and trace of one planner run.
#[derive(Clone, Debug)]
pub struct PlanOutput {
    pub graph: RoadmapGraph,
    pub trace: RunTrace,
}

/// Runs the planner selected by `spec.algorithm`.
pub fn plan(
    scenario: &Scenario,
    spec: &PlannerSpec,
    rng: &mut RngStream,
    schedule: &Schedule,
) -> Result<PlanOutput, PlanError> {
    spec.validate()?;
    match spec.algorithm {
        Algorithm::Prm => build_prm(scenario, spec, rng, schedule),
        Algorithm::SPrm | Algorithm::KSPrm | Algorithm::BoundedDegreeSPrm | Algorithm::VariableRadiusSPrm => {
            build_sprm(scenario, spec, rng, schedule)
        }
        Algorithm::PrmStar | Algorithm::KPrmStar => build_prm_star(scenario, spec, rng, schedule),
        Algorithm::Rrt => build_rrt(scenario, spec, rng, schedule),
        Algorithm::Rrg | Algorithm::KRrg => build_rrg(scenario, spec, rng, schedule),
        Algorithm::RrtStar | Algorithm::KRrtStar => build_rrt_star(scenario, spec, rng, schedule),
    }
}

/// [`plan`] with a fresh stream seeded from `spec.seed`.
pub fn run(scenario: &Scenario, spec: &PlannerSpec, schedule: &Schedule) -> Result<PlanOutput, PlanError> {
    plan(scenario, spec, &mut RngStream::new(spec.seed), schedule)
}
