mod common;

use proptest::prelude::*;

use common::{random_box, sampled_segment_free};
use samplan::geometry::{line_integral_cost, union_volume, unit_ball_volume};
use samplan::{presets, Aabb, CostRegion, PathPolyline, Point, RngStream, Scenario};

#[test]
fn segment_check_matches_dense_sampling() {
    let mut rng = RngStream::new(7);
    let mut compared = 0;
    let mut hits = 0;
    while compared < 1000 {
        let boxes: Vec<Aabb> = (0..5).map(|_| random_box(&mut rng, 2)).collect();
        let a = rng.sample_uniform(2);
        let b = rng.sample_uniform(2);
        let Some(oracle_free) = sampled_segment_free(&boxes, a.coords(), b.coords(), 1e-3) else {
            continue;
        };
        let exact_free = !boxes.iter().any(|bx| bx.segment_hits_interior(a.coords(), b.coords()));
        assert_eq!(exact_free, oracle_free, "a={a:?} b={b:?} boxes={boxes:?}");
        hits += usize::from(!oracle_free);
        compared += 1;
    }
    // both outcomes must be represented for the comparison to mean anything
    assert!(hits > 100 && hits < 900, "hits = {hits}");
}

#[test]
fn scenario_segment_check_matches_dense_sampling_in_3d() {
    let mut rng = RngStream::new(8);
    let mut compared = 0;
    while compared < 300 {
        let boxes: Vec<Aabb> = (0..5).map(|_| random_box(&mut rng, 3)).collect();
        let x_init = rng.sample_uniform(3);
        let Ok(s) = Scenario::new(3, boxes.clone(), x_init, Aabb::cube(3, 0.0, 1.0).unwrap(), Vec::new()) else {
            continue;
        };
        let a = rng.sample_uniform(3);
        let b = rng.sample_uniform(3);
        let Some(oracle_free) = sampled_segment_free(&boxes, a.coords(), b.coords(), 1e-3) else {
            continue;
        };
        assert_eq!(s.segment_collision_free(a.coords(), b.coords()), oracle_free);
        compared += 1;
    }
}

#[test]
fn free_space_measure_matches_monte_carlo() {
    for (name, s) in [
        ("cluttered", presets::cluttered()),
        ("central_obstacle", presets::central_obstacle()),
    ] {
        let exact = s.free_space_measure().unwrap();
        assert!(exact > 0.0 && exact <= 1.0);
        let mut rng = RngStream::new(11);
        let n = 1_000_000;
        let free = (0..n)
            .filter(|_| s.point_in_free(rng.sample_uniform(2).coords()))
            .count();
        let p = free as f64 / n as f64;
        let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!(
            (p - exact).abs() <= 3.0 * sigma,
            "{name}: mc {p} exact {exact} sigma {sigma}"
        );
    }
}

#[test]
fn union_volume_of_overlapping_boxes_matches_grid_count() {
    let mut rng = RngStream::new(12);
    for _ in 0..20 {
        let boxes: Vec<Aabb> = (0..4).map(|_| random_box(&mut rng, 2)).collect();
        let exact = union_volume(&boxes).unwrap();
        // midpoint grid: every cell centre is off the box boundaries almost surely
        let m = 1000;
        let mut inside = 0usize;
        for i in 0..m {
            for j in 0..m {
                let p = [(i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64];
                inside += usize::from(boxes.iter().any(|b| b.contains_closed(&p)));
            }
        }
        let grid = inside as f64 / (m * m) as f64;
        // each box edge misclassifies at most one row of cells
        assert!((grid - exact).abs() < 4.0 * 4.0 / m as f64, "grid {grid} exact {exact}");
    }
}

#[test]
fn unit_ball_volume_matches_gamma_formula() {
    // π^{d/2} / Γ(d/2 + 1) with Γ evaluated by its recurrence from Γ(1) = 1, Γ(1/2) = √π
    for d in 1..=10usize {
        let half = d as f64 / 2.0;
        let mut g = if d % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
        let mut x = if d % 2 == 0 { 1.0 } else { 0.5 };
        while x < half + 1.0 - 1e-9 {
            g *= x;
            x += 1.0;
        }
        let oracle = std::f64::consts::PI.powf(half) / g;
        assert!((unit_ball_volume(d) - oracle).abs() < 1e-12, "d = {d}");
    }
}

#[test]
fn line_integral_matches_riemann_sum() {
    let mut rng = RngStream::new(13);
    for _ in 0..50 {
        let regions: Vec<CostRegion> = (0..3)
            .map(|_| CostRegion::new(random_box(&mut rng, 2), 0.2 + 3.0 * rng.uniform()).unwrap())
            .collect();
        let a = rng.sample_uniform(2);
        let b = rng.sample_uniform(2);
        let exact = line_integral_cost(a.coords(), b.coords(), &regions);
        let len = a.distance(&b);
        let n = 200_000;
        let mut sum = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let p: Vec<f64> = a
                .coords()
                .iter()
                .zip(b.coords())
                .map(|(x, y)| x + t * (y - x))
                .collect();
            sum += regions
                .iter()
                .find(|c| c.region.contains_closed(&p))
                .map_or(1.0, |c| c.weight);
        }
        let riemann = sum * len / n as f64;
        assert!((exact - riemann).abs() < 1e-3, "exact {exact} riemann {riemann}");
    }
}

fn point2() -> impl Strategy<Value = Point> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(x, y)| Point::new(vec![x, y]).unwrap())
}

fn polyline() -> impl Strategy<Value = PathPolyline> {
    prop::collection::vec(point2(), 1..8).prop_map(|w| PathPolyline::new(w).unwrap())
}

proptest! {
    #[test]
    fn concatenation_adds_total_variation(p in polyline(), q in polyline()) {
        // glue q onto the end of p so the two pieces share an endpoint
        let shift: Vec<Point> = std::iter::once(p.end().clone())
            .chain(q.waypoints().iter().skip(1).cloned())
            .collect();
        let q = PathPolyline::new(shift).unwrap();
        let joined = p.concat(&q);
        prop_assert!((joined.total_variation() - p.total_variation() - q.total_variation()).abs() < 1e-12);
    }

    #[test]
    fn total_variation_zero_iff_constant(p in polyline()) {
        let tv = p.total_variation();
        prop_assert!(tv >= 0.0);
        let constant = p.waypoints().iter().all(|w| w == p.start());
        prop_assert_eq!(tv == 0.0, constant);
    }

    #[test]
    fn cost_is_monotone_in_prefixes(p in polyline(), cut in 0usize..8) {
        let s = presets::cost_field();
        let k = cut.min(p.waypoints().len() - 1) + 1;
        let prefix = PathPolyline::new(p.waypoints()[..k].to_vec()).unwrap();
        prop_assert!(prefix.cost(&s) <= p.cost(&s) + 1e-12);
    }

    #[test]
    fn cost_bounded_by_max_weight_times_length(a in point2(), b in point2()) {
        let s = presets::cost_field();
        let c = s.segment_cost(&a, &b);
        prop_assert!(c >= 0.0);
        prop_assert!(c <= s.max_weight() * a.distance(&b) + 1e-12);
    }

    #[test]
    fn segment_free_implies_endpoints_free(a in point2(), b in point2()) {
        let s = presets::cluttered();
        if s.segment_collision_free(a.coords(), b.coords()) {
            prop_assert!(s.point_in_free(a.coords()) && s.point_in_free(b.coords()));
        }
    }

    #[test]
    fn segment_check_is_symmetric(a in point2(), b in point2()) {
        let s = presets::cluttered();
        prop_assert_eq!(
            s.segment_collision_free(a.coords(), b.coords()),
            s.segment_collision_free(b.coords(), a.coords())
        );
    }

    #[test]
    fn scenario_json_round_trips(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let boxes: Vec<Aabb> = (0..3).map(|_| random_box(&mut rng, 2)).collect();
        if let Ok(s) = Scenario::new(2, boxes, rng.sample_uniform(2), Aabb::cube(2, 0.0, 1.0).unwrap(), Vec::new()) {
            let text = serde_json::to_string(&s).unwrap();
            let back: Scenario = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
