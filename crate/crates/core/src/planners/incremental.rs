//! RRT, RRG and RRT*: planners that admit at most one vertex per iteration.
//!
//! All three share the admission rule (sample, nearest, steer, collision
//! check) and consume the random stream identically, so paired runs with the
//! same seed produce the same vertex sequence.

use std::time::Instant;

use crate::geometry::{Point, Scenario};
use crate::graph::{IncrementalDistances, RoadmapGraph, VertexId};
use crate::sampling::RngStream;
use crate::spatial::{Neighbor, VertexIndex};

use super::{
    gamma_star_prm, gamma_star_rrt_tree, k_from_coefficient, k_star, k_star_rrt_tree, steer, Algorithm, PlanError,
    PlanOutput, PlannerSpec, RrtStarConstants, RunTrace, Schedule, TracePoint,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Rrt,
    Rrg,
    RrtStar,
}

#[derive(Clone, Copy, Debug)]
enum NearRule {
    None,
    /// `min{γ (ln|V| / |V|)^{1/d}, η}`.
    Radius(f64),
    /// `kNearest` with `ceil(coefficient · ln|V|)` neighbors.
    Nearest(f64),
}

/// Result of one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Added(VertexId),
    /// The steered segment from the nearest vertex collided.
    Rejected,
}

/// An RRT, RRG or RRT* run that can be advanced one iteration at a time.
pub struct IncrementalPlanner<'a> {
    scenario: &'a Scenario,
    rng: &'a mut RngStream,
    mode: Mode,
    near_rule: NearRule,
    eta: f64,
    graph: RoadmapGraph,
    index: VertexIndex,
    in_goal: Vec<bool>,
    /// Tree modes: cost of the root path of every vertex.
    costs: Vec<f64>,
    /// RRG: shortest-path distances from the root.
    dists: IncrementalDistances,
    best: f64,
    iteration: usize,
    last_near: Vec<VertexId>,
    trace: RunTrace,
}

impl<'a> IncrementalPlanner<'a> {
    pub fn new(scenario: &'a Scenario, spec: &PlannerSpec, rng: &'a mut RngStream) -> Result<Self, PlanError> {
        spec.validate()?;
        let d = scenario.dim();
        let mode = match spec.algorithm {
            Algorithm::Rrt => Mode::Rrt,
            Algorithm::Rrg | Algorithm::KRrg => Mode::Rrg,
            Algorithm::RrtStar | Algorithm::KRrtStar => Mode::RrtStar,
            other => return Err(PlanError::Spec(format!("{other} is not an incremental tree planner"))),
        };
        let tree_constants = mode == Mode::RrtStar && spec.rrt_star_constants == RrtStarConstants::Tree;
        let near_rule = match spec.algorithm {
            Algorithm::Rrt => NearRule::None,
            Algorithm::Rrg | Algorithm::RrtStar => {
                let mu = scenario.free_space_measure()?;
                let gamma = if tree_constants {
                    gamma_star_rrt_tree(d, mu)
                } else {
                    gamma_star_prm(d, mu)
                };
                NearRule::Radius(spec.gamma_factor * gamma)
            }
            _ => {
                let k = if tree_constants { k_star_rrt_tree(d) } else { k_star(d) };
                NearRule::Nearest(spec.k_factor * k)
            }
        };

        let root = scenario.x_init().clone();
        let root_in_goal = scenario.in_goal(root.coords());
        let mut index = VertexIndex::new(d);
        index.insert(root.coords(), 0)?;
        let graph = if mode == Mode::Rrg {
            let mut g = RoadmapGraph::roadmap(d);
            g.add_vertex(root)?;
            g
        } else {
            RoadmapGraph::tree(root)
        };
        let mut dists = IncrementalDistances::new();
        if mode == Mode::Rrg {
            dists.push_vertex(root_in_goal);
        }
        Ok(Self {
            scenario,
            rng,
            mode,
            near_rule,
            eta: spec.eta_for(d),
            graph,
            index,
            in_goal: vec![root_in_goal],
            costs: vec![0.0],
            dists,
            best: if root_in_goal { 0.0 } else { f64::INFINITY },
            iteration: 0,
            last_near: Vec::new(),
            trace: RunTrace::default(),
        })
    }

    pub fn graph(&self) -> &RoadmapGraph {
        &self.graph
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Cost of the best goal-reaching path found so far.
    pub fn best_cost(&self) -> f64 {
        self.best
    }

    /// Root-path cost of `v` as the planner maintains it.
    pub fn cost(&self, v: VertexId) -> f64 {
        match self.mode {
            Mode::Rrg => self.dists.distance(v),
            _ => self.costs[v],
        }
    }

    /// The `X_near` set examined in the latest iteration.
    pub fn last_near(&self) -> &[VertexId] {
        &self.last_near
    }

    pub fn collision_checks(&self) -> u64 {
        self.trace.collision_checks
    }

    pub fn step(&mut self) -> Result<StepOutcome, PlanError> {
        self.iteration += 1;
        self.last_near.clear();
        let x_rand = self.rng.sample_free(self.scenario)?;
        let nearest = self.index.nearest(x_rand.coords())?.id;
        let x_new = steer(self.graph.point(nearest), &x_rand, self.eta);
        if !self.check(nearest, &x_new) {
            return Ok(StepOutcome::Rejected);
        }
        let near = self.near_set(&x_new);
        let v = match self.mode {
            Mode::Rrt => self.attach(nearest, x_new)?,
            Mode::Rrg => self.connect_all(nearest, &near, x_new)?,
            Mode::RrtStar => self.attach_and_rewire(nearest, &near, x_new)?,
        };
        self.last_near = near.iter().map(|nb| nb.id).collect();
        Ok(StepOutcome::Added(v))
    }

    /// Runs `n` iterations, recording trace rows at the scheduled checkpoints.
    pub fn run(mut self, n: usize, schedule: &Schedule) -> Result<PlanOutput, PlanError> {
        let checkpoints = schedule.checkpoints(n);
        let mut next_cp = 0;
        let start = Instant::now();
        for i in 1..=n {
            self.step()?;
            if checkpoints.get(next_cp) == Some(&i) {
                next_cp += 1;
                self.trace.points.push(TracePoint {
                    iteration: i,
                    best_cost: self.best,
                    elapsed_s: start.elapsed().as_secs_f64(),
                    collision_checks: self.trace.collision_checks,
                });
            }
        }
        Ok(self.into_output())
    }

    pub fn into_output(self) -> PlanOutput {
        PlanOutput {
            graph: self.graph,
            trace: self.trace,
        }
    }

    fn check(&mut self, from: VertexId, to: &Point) -> bool {
        self.trace.collision_checks += 1;
        let free = self
            .scenario
            .segment_collision_free(self.graph.point(from).coords(), to.coords());
        if free {
            self.trace.free_checks += 1;
        }
        free
    }

    /// Neighbors of `x_new` among the current vertices (before insertion).
    fn near_set(&self, x_new: &Point) -> Vec<Neighbor> {
        let card = self.graph.vertex_count();
        match self.near_rule {
            NearRule::None => Vec::new(),
            NearRule::Radius(gamma) => {
                let n = card as f64;
                let r = (gamma * (n.ln() / n).powf(1.0 / self.scenario.dim() as f64)).min(self.eta);
                if r > 0.0 {
                    self.index.near(x_new.coords(), r)
                } else {
                    Vec::new()
                }
            }
            NearRule::Nearest(coefficient) => self
                .index
                .k_nearest(x_new.coords(), k_from_coefficient(card, coefficient)),
        }
    }

    fn register(&mut self, v: VertexId) -> Result<bool, PlanError> {
        self.index.insert(self.graph.point(v).coords(), v)?;
        let in_goal = self.scenario.in_goal(self.graph.point(v).coords());
        self.in_goal.push(in_goal);
        Ok(in_goal)
    }

    fn attach(&mut self, parent: VertexId, x_new: Point) -> Result<VertexId, PlanError> {
        let cost = self.scenario.segment_cost(self.graph.point(parent), &x_new);
        let v = self.graph.add_child(parent, x_new, cost)?;
        self.trace.edges_added += 1;
        let c = self.costs[parent] + cost;
        self.costs.push(c);
        if self.register(v)? && c < self.best {
            self.best = c;
        }
        Ok(v)
    }

    fn connect_all(&mut self, nearest: VertexId, near: &[Neighbor], x_new: Point) -> Result<VertexId, PlanError> {
        let v = self.graph.add_vertex(x_new)?;
        let in_goal = self.register(v)?;
        self.dists.push_vertex(in_goal);
        self.add_rrg_edge(nearest, v)?;
        for nb in near {
            if nb.id == nearest {
                continue;
            }
            let p = self.graph.point(v).clone();
            if self.check(nb.id, &p) {
                self.add_rrg_edge(nb.id, v)?;
            }
        }
        self.best = self.dists.best_goal_cost();
        Ok(v)
    }

    fn add_rrg_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), PlanError> {
        let cost = self.scenario.segment_cost(self.graph.point(u), self.graph.point(v));
        if self.graph.add_undirected_edge(u, v, cost)? {
            self.trace.edges_added += 2;
            self.dists.edge_added(&self.graph, u, v, cost);
        }
        Ok(())
    }

    fn attach_and_rewire(&mut self, nearest: VertexId, near: &[Neighbor], x_new: Point) -> Result<VertexId, PlanError> {
        // Collision results per near vertex, reused by the rewiring pass.
        let mut free: Vec<Option<bool>> = vec![None; near.len()];
        let mut parent = nearest;
        let mut parent_edge = self.scenario.segment_cost(self.graph.point(nearest), &x_new);
        let mut c_min = self.costs[nearest] + parent_edge;
        for (i, nb) in near.iter().enumerate() {
            if nb.id == nearest {
                free[i] = Some(true);
                continue;
            }
            let edge = self.scenario.segment_cost(self.graph.point(nb.id), &x_new);
            let cand = self.costs[nb.id] + edge;
            if cand < c_min {
                let ok = self.check(nb.id, &x_new);
                free[i] = Some(ok);
                if ok {
                    parent = nb.id;
                    parent_edge = edge;
                    c_min = cand;
                }
            }
        }
        let v = self.graph.add_child(parent, x_new, parent_edge)?;
        self.trace.edges_added += 1;
        self.costs.push(c_min);
        if self.register(v)? && c_min < self.best {
            self.best = c_min;
        }

        for (i, nb) in near.iter().enumerate() {
            let u = nb.id;
            if u == parent {
                continue;
            }
            let edge = self.scenario.segment_cost(self.graph.point(v), self.graph.point(u));
            let cand = self.costs[v] + edge;
            if cand >= self.costs[u] {
                continue;
            }
            let ok = match free[i] {
                Some(ok) => ok,
                None => {
                    let p = self.graph.point(u).clone();
                    self.check(v, &p)
                }
            };
            if ok {
                self.graph.reparent(u, v, edge)?;
                self.trace.edges_added += 1;
                self.costs[u] = cand;
                self.propagate_from(u);
            }
        }
        Ok(v)
    }

    /// Refreshes the cached costs of `root`'s subtree after its cost dropped.
    fn propagate_from(&mut self, root: VertexId) {
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            let cx = self.costs[x];
            if self.in_goal[x] && cx < self.best {
                self.best = cx;
            }
            for e in self.graph.out_edges(x) {
                self.costs[e.to] = cx + e.cost;
                stack.push(e.to);
            }
        }
    }
}

pub fn build_rrt(
    scenario: &Scenario,
    spec: &PlannerSpec,
    rng: &mut RngStream,
    schedule: &Schedule,
) -> Result<PlanOutput, PlanError> {
    expect(spec, &[Algorithm::Rrt])?;
    IncrementalPlanner::new(scenario, spec, rng)?.run(spec.n, schedule)
}

pub fn build_rrg(
    scenario: &Scenario,
    spec: &PlannerSpec,
    rng: &mut RngStream,
    schedule: &Schedule,
) -> Result<PlanOutput, PlanError> {
    expect(spec, &[Algorithm::Rrg, Algorithm::KRrg])?;
    IncrementalPlanner::new(scenario, spec, rng)?.run(spec.n, schedule)
}

pub fn build_rrt_star(
    scenario: &Scenario,
    spec: &PlannerSpec,
    rng: &mut RngStream,
    schedule: &Schedule,
) -> Result<PlanOutput, PlanError> {
    expect(spec, &[Algorithm::RrtStar, Algorithm::KRrtStar])?;
    IncrementalPlanner::new(scenario, spec, rng)?.run(spec.n, schedule)
}

fn expect(spec: &PlannerSpec, allowed: &[Algorithm]) -> Result<(), PlanError> {
    if allowed.contains(&spec.algorithm) {
        Ok(())
    } else {
        Err(PlanError::Spec(format!(
            "{} cannot be built by this planner",
            spec.algorithm
        )))
    }
}
