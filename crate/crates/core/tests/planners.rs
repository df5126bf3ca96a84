use std::collections::HashSet;

use samplan::graph::{GraphDump, VertexId};
use samplan::planners::{k_of_n, radius_prm_star, steer, IncrementalPlanner, StepOutcome};
use samplan::rgg::{gen_rgg_on, RggKind};
use samplan::{plan, presets, Aabb, Algorithm, PlannerSpec, Point, RngStream, RoadmapGraph, Scenario, Schedule};

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn run(s: &Scenario, spec: &PlannerSpec, seed: u64, schedule: &Schedule) -> samplan::PlanOutput {
    plan(s, spec, &mut RngStream::new(seed), schedule).unwrap()
}

fn edge_set(g: &RoadmapGraph) -> HashSet<(VertexId, VertexId)> {
    g.edges().map(|(u, v, _)| (u.min(v), u.max(v))).collect()
}

fn spec_for(a: Algorithm, n: usize) -> PlannerSpec {
    let spec = PlannerSpec::new(a, n);
    match a {
        Algorithm::Prm | Algorithm::SPrm | Algorithm::BoundedDegreeSPrm => spec.with_radius(0.15),
        Algorithm::VariableRadiusSPrm => spec.with_radius_gamma(1.0),
        _ => spec,
    }
}

#[test]
fn prm_with_no_iterations_is_empty() {
    let out = run(
        &presets::open_square(),
        &spec_for(Algorithm::Prm, 0),
        1,
        &Schedule::EveryIteration,
    );
    assert_eq!(out.graph.vertex_count(), 0);
    assert_eq!(out.graph.edge_count(), 0);
}

#[test]
fn prm_with_huge_radius_builds_a_spanning_tree() {
    let spec = PlannerSpec::new(Algorithm::Prm, 50).with_radius(2.0);
    let out = run(&presets::open_square(), &spec, 2, &Schedule::EveryIteration);
    assert_eq!(out.graph.vertex_count(), 50);
    assert_eq!(out.graph.undirected_edges().len(), 49);
    assert_eq!(out.graph.component_count(), 1);
}

#[test]
fn prm_output_is_always_a_forest() {
    for seed in 0..10 {
        let out = run(
            &presets::cluttered(),
            &spec_for(Algorithm::Prm, 400),
            seed,
            &Schedule::EveryIteration,
        );
        let g = &out.graph;
        assert_eq!(g.undirected_edges().len(), g.vertex_count() - g.component_count());
    }
}

#[test]
fn sprm_with_huge_radius_is_complete() {
    let spec = PlannerSpec::new(Algorithm::SPrm, 20).with_radius(2.0);
    let out = run(&presets::open_square(), &spec, 3, &Schedule::EveryIteration);
    assert_eq!(out.graph.vertex_count(), 21);
    assert_eq!(out.graph.edge_count(), 21 * 20);
}

#[test]
fn sprm_edges_equal_successful_checks() {
    for seed in 0..5 {
        let out = run(
            &presets::cluttered(),
            &spec_for(Algorithm::SPrm, 300),
            seed,
            &Schedule::EveryIteration,
        );
        // each free pair is checked once from each endpoint and yields one directed edge per check
        assert_eq!(out.graph.edge_count() as u64, out.trace.free_checks);
        assert_eq!(out.trace.edges_added, out.trace.free_checks);
    }
}

#[test]
fn k_nearest_sprm_checks_k_per_vertex() {
    for k in [1, 5, 15] {
        let spec = PlannerSpec::new(Algorithm::KSPrm, 300).with_k(k);
        let out = run(&presets::cluttered(), &spec, 4, &Schedule::EveryIteration);
        assert_eq!(out.trace.collision_checks, 301 * k as u64);
        for v in 0..out.graph.vertex_count() {
            assert!(out.graph.out_edges(v).len() <= 301);
        }
    }
}

#[test]
fn bounded_degree_sprm_respects_radius_and_degree() {
    let spec = PlannerSpec::new(Algorithm::BoundedDegreeSPrm, 500)
        .with_radius(0.1)
        .with_k(5);
    let out = run(&presets::open_square(), &spec, 5, &Schedule::EveryIteration);
    let g = &out.graph;
    for (u, v, _) in g.edges() {
        assert!(g.point(u).distance(g.point(v)) <= 0.1);
    }
    assert!(out.trace.collision_checks <= 501 * 5);
}

#[test]
fn variable_radius_sprm_uses_n_to_the_minus_one_over_d() {
    let spec = PlannerSpec::new(Algorithm::VariableRadiusSPrm, 400).with_radius_gamma(2.0);
    let out = run(&presets::open_square(), &spec, 6, &Schedule::EveryIteration);
    let r = 2.0 / 400f64.sqrt();
    let g = &out.graph;
    let brute: usize = (0..g.vertex_count())
        .flat_map(|u| (u + 1..g.vertex_count()).map(move |v| (u, v)))
        .filter(|&(u, v)| g.point(u).distance(g.point(v)) <= r)
        .count();
    assert_eq!(g.undirected_edges().len(), brute);
}

#[test]
fn prm_star_radius_matches_closed_form() {
    let r = radius_prm_star(1000, 2, 1.0, 1.1).unwrap();
    let oracle = 1.1 * 2.0 * (1.5f64 / std::f64::consts::PI).sqrt() * (1000f64.ln() / 1000.0).sqrt();
    assert!((r - oracle).abs() < 1e-12);
    assert!((r - 0.12634).abs() < 1e-5);

    // with no obstacles the roadmap is exactly the r-disc graph at that radius
    let out = run(
        &presets::open_square(),
        &PlannerSpec::new(Algorithm::PrmStar, 1000),
        7,
        &Schedule::EveryIteration,
    );
    let g = &out.graph;
    let mut brute = HashSet::new();
    for u in 0..g.vertex_count() {
        for v in u + 1..g.vertex_count() {
            if g.point(u).distance(g.point(v)) <= r {
                brute.insert((u, v));
            }
        }
    }
    assert_eq!(edge_set(g), brute);
}

#[test]
fn prm_star_radius_decreases() {
    let mut last = f64::INFINITY;
    for n in 3..2000 {
        let r = radius_prm_star(n, 2, 1.0, 1.1).unwrap();
        assert!(r < last);
        last = r;
    }
    assert!(radius_prm_star(1, 2, 1.0, 1.1).is_err());
}

#[test]
fn k_prm_star_degree_at_least_k() {
    let n = 1000;
    let out = run(
        &presets::open_square(),
        &PlannerSpec::new(Algorithm::KPrmStar, n),
        8,
        &Schedule::EveryIteration,
    );
    let k = k_of_n(n, 2, 1.1);
    assert_eq!(k, (1.1 * std::f64::consts::E * 1.5 * (n as f64).ln()).ceil() as usize);
    for v in 0..out.graph.vertex_count() {
        assert!(out.graph.out_edges(v).len() >= k);
    }
}

#[test]
fn prm_star_mean_degree_grows() {
    let mean_degree = |n: usize| {
        (0..20)
            .map(|t| {
                let out = run(
                    &presets::open_square(),
                    &PlannerSpec::new(Algorithm::PrmStar, n),
                    100 + t,
                    &Schedule::EveryIteration,
                );
                out.graph.edge_count() as f64 / out.graph.vertex_count() as f64
            })
            .sum::<f64>()
            / 20.0
    };
    assert!(mean_degree(4000) > mean_degree(500));
}

#[test]
fn rrt_boxed_in_start_never_grows() {
    // four overlapping boxes meet at x_init, so every direction leaves through an interior
    let boxes = vec![
        Aabb::from_corners(&[0.3, 0.3], &[0.5, 0.7]).unwrap(),
        Aabb::from_corners(&[0.5, 0.3], &[0.7, 0.7]).unwrap(),
        Aabb::from_corners(&[0.3, 0.3], &[0.7, 0.5]).unwrap(),
        Aabb::from_corners(&[0.3, 0.5], &[0.7, 0.7]).unwrap(),
    ];
    let s = Scenario::new(2, boxes, pt(&[0.5, 0.5]), Aabb::cube(2, 0.9, 1.0).unwrap(), Vec::new()).unwrap();
    for a in [Algorithm::Rrt, Algorithm::Rrg, Algorithm::RrtStar] {
        let out = run(&s, &PlannerSpec::new(a, 500), 9, &Schedule::EveryIteration);
        assert_eq!(out.graph.vertex_count(), 1, "{a}");
        assert_eq!(out.trace.collision_checks, 500);
    }
}

#[test]
fn rrt_without_obstacles_is_the_online_nearest_neighbor_graph() {
    let n = 2000;
    let out = run(
        &presets::open_square(),
        &PlannerSpec::new(Algorithm::Rrt, n),
        10,
        &Schedule::EveryIteration,
    );
    let g = &out.graph;
    assert_eq!(g.vertex_count(), n + 1);
    assert_eq!(out.trace.collision_checks, n as u64);
    let online = gen_rgg_on(g.vertices(), RggKind::OnlineNn, 2);
    assert_eq!(edge_set(g), edge_set(&online));
}

#[test]
fn incremental_planners_share_vertices_and_dominate_rrt() {
    for (s, seed) in [
        (presets::cluttered(), 11),
        (presets::central_obstacle(), 12),
        (presets::cost_field(), 13),
    ] {
        let spec = |a| PlannerSpec::new(a, 3000).with_eta(0.1);
        let rrt = run(&s, &spec(Algorithm::Rrt), seed, &Schedule::EveryIteration);
        let rrg = run(&s, &spec(Algorithm::Rrg), seed, &Schedule::EveryIteration);
        let star = run(&s, &spec(Algorithm::RrtStar), seed, &Schedule::EveryIteration);
        assert_eq!(rrt.graph.vertices(), rrg.graph.vertices());
        assert_eq!(rrt.graph.vertices(), star.graph.vertices());
        assert!(edge_set(&rrt.graph).is_subset(&edge_set(&rrg.graph)));
        for ((a, b), c) in rrt.trace.points.iter().zip(&rrg.trace.points).zip(&star.trace.points) {
            assert_eq!(a.iteration, b.iteration);
            assert!(b.best_cost <= a.best_cost, "RRG worse at {}", a.iteration);
            assert!(c.best_cost <= a.best_cost, "RRT* worse at {}", a.iteration);
        }
        assert_eq!(rrg.graph.component_count(), 1);
    }
}

#[test]
fn k_nearest_incremental_planners_share_vertices() {
    let s = presets::cluttered();
    let base = run(
        &s,
        &PlannerSpec::new(Algorithm::Rrt, 1500).with_eta(0.1),
        14,
        &Schedule::EveryIteration,
    );
    for a in [Algorithm::KRrg, Algorithm::KRrtStar] {
        let out = run(
            &s,
            &PlannerSpec::new(a, 1500).with_eta(0.1),
            14,
            &Schedule::EveryIteration,
        );
        assert_eq!(out.graph.vertices(), base.graph.vertices());
    }
}

#[test]
fn rrg_stays_connected_every_iteration() {
    let s = presets::cluttered();
    let spec = PlannerSpec::new(Algorithm::Rrg, 800).with_eta(0.1);
    let mut rng = RngStream::new(15);
    let mut p = IncrementalPlanner::new(&s, &spec, &mut rng).unwrap();
    for _ in 0..800 {
        p.step().unwrap();
        assert_eq!(p.graph().component_count(), 1);
    }
}

#[test]
fn rrt_star_tree_costs_and_local_optimality_hold_every_iteration() {
    let s = presets::cost_field();
    let spec = PlannerSpec::new(Algorithm::RrtStar, 5000).with_eta(0.2);
    let mut rng = RngStream::new(16);
    let mut p = IncrementalPlanner::new(&s, &spec, &mut rng).unwrap();
    for i in 1..=5000 {
        let StepOutcome::Added(v) = p.step().unwrap() else {
            continue;
        };
        let g = p.graph();
        assert!((p.cost(v) - g.tree_cost_of(v).unwrap()).abs() <= 1e-9);
        let parent = g.parent(v).unwrap();
        for &u in p.last_near() {
            assert!((p.cost(u) - g.tree_cost_of(u).unwrap()).abs() <= 1e-9);
            let (pu, pv) = (g.point(u), g.point(v));
            if !s.segment_collision_free(pu.coords(), pv.coords()) {
                continue;
            }
            let edge = s.segment_cost(pu, pv);
            // v picked its cheapest parent, and no near vertex gains by moving under v
            assert!(
                p.cost(v) <= p.cost(u) + edge + 1e-12,
                "iteration {i}: parent of {v} not optimal"
            );
            if u != parent {
                assert!(
                    p.cost(v) + edge >= p.cost(u) - 1e-12,
                    "iteration {i}: {u} should rewire"
                );
            }
        }
        if i % 500 == 0 {
            g.validate_tree().unwrap();
            for w in 0..g.vertex_count() {
                assert!((p.cost(w) - g.tree_cost_of(w).unwrap()).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn every_planner_is_sound() {
    let s = presets::cluttered();
    for a in Algorithm::ALL {
        let out = run(&s, &spec_for(a, 600).with_eta(0.2), 17, &Schedule::EveryIteration);
        let g = &out.graph;
        for p in g.vertices() {
            assert!(s.point_in_free(p.coords()), "{a}");
        }
        for (u, v, c) in g.edges() {
            assert!(
                s.segment_collision_free(g.point(u).coords(), g.point(v).coords()),
                "{a}"
            );
            assert!(c > 0.0);
        }
        if g.is_tree() {
            g.validate_tree().unwrap();
        }
    }
}

#[test]
fn monotone_planners_have_nonincreasing_cost_series() {
    let s = presets::central_obstacle();
    for a in Algorithm::ALL.into_iter().filter(|a| a.has_monotone_cost()) {
        for seed in 0..3 {
            let spec = spec_for(a, 1500).with_eta(0.2);
            let out = run(&s, &spec, seed, &Schedule::log_spaced(1500, 12));
            let costs = out.trace.best_costs();
            for w in costs.windows(2) {
                assert!(w[0].0 < w[1].0);
                assert!(w[1].1 <= w[0].1, "{a} seed {seed}: {:?}", costs);
            }
        }
    }
}

#[test]
fn collision_calls_grow_logarithmically() {
    let s = presets::open_square();
    let per_iter = |a: Algorithm, n: usize| {
        let out = run(&s, &PlannerSpec::new(a, n), 18, &Schedule::EveryIteration);
        out.trace.collision_checks as f64 / n as f64
    };
    let log_ratio = 10_000f64.ln() / 1000f64.ln();
    for a in [Algorithm::PrmStar, Algorithm::Rrg, Algorithm::RrtStar] {
        let ratio = per_iter(a, 10_000) / per_iter(a, 1000);
        assert!(ratio < 1.5 * log_ratio, "{a}: ratio {ratio}");
    }
    // RRT checks exactly once per iteration
    assert_eq!(per_iter(Algorithm::Rrt, 1000), 1.0);
}

#[test]
fn runs_are_deterministic() {
    let s = presets::cluttered();
    for a in Algorithm::ALL {
        let spec = spec_for(a, 400).with_eta(0.2);
        let one = run(&s, &spec, 19, &Schedule::log_spaced(400, 5));
        let two = run(&s, &spec, 19, &Schedule::log_spaced(400, 5));
        let dump = |g: &RoadmapGraph| -> GraphDump { g.to_dump() };
        assert_eq!(dump(&one.graph), dump(&two.graph));
        assert_eq!(one.trace.best_costs(), two.trace.best_costs());
        assert_eq!(one.trace.collision_checks, two.trace.collision_checks);
    }
}

#[test]
fn steer_output_is_closest_point_in_the_ball() {
    let mut rng = RngStream::new(20);
    for _ in 0..20 {
        let x = rng.sample_uniform(2);
        let y = rng.sample_uniform(2);
        let eta = 0.05 + 0.3 * rng.uniform();
        let z = steer(&x, &y, eta);
        assert!(x.distance(&z) <= eta + 1e-12);
        let best = z.distance(&y);
        for _ in 0..10_000 {
            // uniform in the disc around x by rejection from its bounding square
            let c = loop {
                let u = [2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0];
                if u[0] * u[0] + u[1] * u[1] <= 1.0 {
                    break [x[0] + eta * u[0], x[1] + eta * u[1]];
                }
            };
            let dc = ((c[0] - y[0]).powi(2) + (c[1] - y[1]).powi(2)).sqrt();
            assert!(dc >= best - 1e-12);
        }
    }
    let x = pt(&[0.0, 0.0]);
    assert_eq!(steer(&x, &pt(&[1.0, 0.0]), 0.5), pt(&[0.5, 0.0]));
    assert_eq!(steer(&x, &pt(&[0.3, 0.0]), 0.5), pt(&[0.3, 0.0]));
    assert_eq!(steer(&x, &x, 0.5), x);
}
