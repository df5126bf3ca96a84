//! PRM (incremental forest) and the batch roadmaps: sPRM and its variants,
//! PRM* and k-nearest PRM*.

use std::time::Instant;

use crate::geometry::{Point, Scenario};
use crate::graph::{shortest_path, IncrementalDistances, RoadmapGraph};
use crate::sampling::RngStream;
use crate::spatial::{Neighbor, VertexIndex};

use super::{
    k_from_coefficient, k_star, radius_prm_star, Algorithm, PlanError, PlanOutput, PlannerSpec, RunTrace, Schedule,
    TracePoint,
};

/// PRM preprocessing: a forest grown one free sample at a time.
///
/// The first vertex is `x_init`, so a run of `n` iterations has `n` vertices.
/// Each new vertex tries its `Near` set in order of increasing distance and
/// skips vertices already in its component.
pub fn build_prm(
    scenario: &Scenario,
    spec: &PlannerSpec,
    rng: &mut RngStream,
    schedule: &Schedule,
) -> Result<PlanOutput, PlanError> {
    expect_algorithm(spec, &[Algorithm::Prm])?;
    spec.validate()?;
    let r = spec.radius.expect("validated");
    let d = scenario.dim();
    let checkpoints = schedule.checkpoints(spec.n);
    let mut next_cp = 0;
    let start = Instant::now();

    let mut graph = RoadmapGraph::roadmap(d);
    let mut index = VertexIndex::new(d);
    let mut dists = IncrementalDistances::new();
    let mut trace = RunTrace::default();

    for i in 1..=spec.n {
        let x = if i == 1 {
            scenario.x_init().clone()
        } else {
            rng.sample_free(scenario)?
        };
        let near = index.near(x.coords(), r);
        let in_goal = scenario.in_goal(x.coords());
        let v = graph.add_vertex(x)?;
        index.insert(graph.point(v).coords(), v)?;
        dists.push_vertex(in_goal);
        for nb in near {
            if graph.same_component(v, nb.id)? {
                continue;
            }
            trace.collision_checks += 1;
            if scenario.segment_collision_free(graph.point(v).coords(), graph.point(nb.id).coords()) {
                trace.free_checks += 1;
                let cost = scenario.segment_cost(graph.point(v), graph.point(nb.id));
                if graph.add_undirected_edge(v, nb.id, cost)? {
                    trace.edges_added += 2;
                    dists.edge_added(&graph, v, nb.id, cost);
                }
            }
        }
        if checkpoints.get(next_cp) == Some(&i) {
            next_cp += 1;
            trace.points.push(TracePoint {
                iteration: i,
                best_cost: dists.best_goal_cost(),
                elapsed_s: start.elapsed().as_secs_f64(),
                collision_checks: trace.collision_checks,
            });
        }
    }
    Ok(PlanOutput { graph, trace })
}

/// sPRM and its k-nearest, bounded-degree and variable-radius variants.
pub fn build_sprm(
    scenario: &Scenario,
    spec: &PlannerSpec,
    rng: &mut RngStream,
    schedule: &Schedule,
) -> Result<PlanOutput, PlanError> {
    expect_algorithm(
        spec,
        &[
            Algorithm::SPrm,
            Algorithm::KSPrm,
            Algorithm::BoundedDegreeSPrm,
            Algorithm::VariableRadiusSPrm,
        ],
    )?;
    build_batch(scenario, spec, rng, schedule)
}

/// PRM* (shrinking radius) and k-nearest PRM* (logarithmic neighbor count).
pub fn build_prm_star(
    scenario: &Scenario,
    spec: &PlannerSpec,
    rng: &mut RngStream,
    schedule: &Schedule,
) -> Result<PlanOutput, PlanError> {
    expect_algorithm(spec, &[Algorithm::PrmStar, Algorithm::KPrmStar])?;
    build_batch(scenario, spec, rng, schedule)
}

fn expect_algorithm(spec: &PlannerSpec, allowed: &[Algorithm]) -> Result<(), PlanError> {
    if allowed.contains(&spec.algorithm) {
        Ok(())
    } else {
        Err(PlanError::Spec(format!(
            "{} cannot be built by this planner",
            spec.algorithm
        )))
    }
}

/// Per-vertex neighbor rule of a batch roadmap over `m` samples.
#[derive(Clone, Copy, Debug)]
enum NeighborRule {
    Radius(f64),
    Nearest(usize),
    NearestWithin(usize, f64),
}

impl NeighborRule {
    fn for_samples(spec: &PlannerSpec, m: usize, d: usize, mu_free: f64) -> Result<Self, PlanError> {
        Ok(match spec.algorithm {
            Algorithm::SPrm => NeighborRule::Radius(spec.radius.expect("validated")),
            Algorithm::KSPrm => NeighborRule::Nearest(spec.neighbor_count()),
            Algorithm::BoundedDegreeSPrm => {
                NeighborRule::NearestWithin(spec.neighbor_count(), spec.radius.expect("validated"))
            }
            Algorithm::VariableRadiusSPrm => {
                let gamma = spec.radius_gamma.expect("validated");
                NeighborRule::Radius(gamma * (m.max(1) as f64).powf(-1.0 / d as f64))
            }
            // A single sample has no defined radius; the two-sample value connects it.
            Algorithm::PrmStar => NeighborRule::Radius(radius_prm_star(m.max(2), d, mu_free, spec.gamma_factor)?),
            Algorithm::KPrmStar => NeighborRule::Nearest(k_from_coefficient(m, spec.k_factor * k_star(d))),
            other => return Err(PlanError::Spec(format!("{other} is not a batch planner"))),
        })
    }

    /// Neighbors of vertex `v` excluding `v` itself.
    fn neighbors(self, index: &VertexIndex, v: usize, x: &[f64]) -> Vec<Neighbor> {
        let mut out = match self {
            NeighborRule::Radius(r) => index.near(x, r),
            NeighborRule::Nearest(k) | NeighborRule::NearestWithin(k, _) => index.k_nearest(x, k + 1),
        };
        out.retain(|nb| nb.id != v);
        match self {
            NeighborRule::Radius(_) => {}
            NeighborRule::Nearest(k) => out.truncate(k),
            NeighborRule::NearestWithin(k, r) => {
                out.truncate(k);
                out.retain(|nb| nb.distance <= r);
            }
        }
        out
    }
}

fn build_batch(
    scenario: &Scenario,
    spec: &PlannerSpec,
    rng: &mut RngStream,
    schedule: &Schedule,
) -> Result<PlanOutput, PlanError> {
    spec.validate()?;
    let d = scenario.dim();
    let mu_free = if spec.algorithm == Algorithm::PrmStar {
        scenario.free_space_measure()?
    } else {
        1.0
    };
    let samples = (0..spec.n)
        .map(|_| rng.sample_free(scenario))
        .collect::<Result<Vec<_>, _>>()?;

    let mut trace = RunTrace::default();
    let mut cumulative_checks = 0;
    let checkpoints = schedule.batch_checkpoints(spec.n);
    let mut last = None;
    for &m in &checkpoints {
        let start = Instant::now();
        let rule = NeighborRule::for_samples(spec, m, d, mu_free)?;
        let (graph, counters) = roadmap_over(scenario, &samples[..m], rule)?;
        let best = shortest_path(&graph, 0, |p| scenario.in_goal(p.coords()))?.cost;
        cumulative_checks += counters.collision_checks;
        trace.points.push(TracePoint {
            iteration: m,
            best_cost: best,
            elapsed_s: start.elapsed().as_secs_f64(),
            collision_checks: cumulative_checks,
        });
        last = Some((graph, counters));
    }
    let (graph, counters) = match last {
        Some(built) if checkpoints.last() == Some(&spec.n) => built,
        _ => roadmap_over(scenario, &samples, NeighborRule::for_samples(spec, spec.n, d, mu_free)?)?,
    };
    trace.collision_checks = counters.collision_checks;
    trace.free_checks = counters.free_checks;
    trace.edges_added = counters.edges_added;
    Ok(PlanOutput { graph, trace })
}

#[derive(Default)]
struct Counters {
    collision_checks: u64,
    free_checks: u64,
    edges_added: u64,
}

/// Roadmap over `{x_init} ∪ samples` with vertex 0 at `x_init`.
fn roadmap_over(
    scenario: &Scenario,
    samples: &[Point],
    rule: NeighborRule,
) -> Result<(RoadmapGraph, Counters), PlanError> {
    let d = scenario.dim();
    let mut graph = RoadmapGraph::roadmap(d);
    let mut index = VertexIndex::new(d);
    for p in std::iter::once(scenario.x_init()).chain(samples) {
        let v = graph.add_vertex(p.clone())?;
        index.insert(p.coords(), v)?;
    }
    let mut c = Counters::default();
    for v in 0..graph.vertex_count() {
        let x = graph.point(v).clone();
        for nb in rule.neighbors(&index, v, x.coords()) {
            let y = graph.point(nb.id);
            c.collision_checks += 1;
            if !scenario.segment_collision_free(x.coords(), y.coords()) {
                continue;
            }
            c.free_checks += 1;
            let cost = scenario.segment_cost(&x, y);
            if graph.add_undirected_edge(v, nb.id, cost)? {
                c.edges_added += 2;
            }
        }
    }
    Ok((graph, c))
}
