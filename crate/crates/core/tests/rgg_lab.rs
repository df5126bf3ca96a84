use std::collections::HashSet;

use samplan::geometry::unit_ball_volume;
use samplan::rgg::{
    connectivity_threshold_radius, gen_rgg, gen_rgg_on, sweep, ModelFamily, ParamScale, RggKind, RggModel, SweepConfig,
};
use samplan::{Point, RngStream, RoadmapGraph};

fn edge_set(g: &RoadmapGraph) -> HashSet<(usize, usize)> {
    g.edges().map(|(u, v, _)| (u.min(v), u.max(v))).collect()
}

fn points(seed: u64, n: usize, d: usize) -> Vec<Point> {
    let mut rng = RngStream::new(seed);
    (0..n).map(|_| rng.sample_uniform(d)).collect()
}

fn dist(a: &Point, b: &Point) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Indices of the `k` nearest other points by (distance, index).
fn brute_knn(pts: &[Point], i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<(f64, usize)> = (0..pts.len())
        .filter(|&j| j != i)
        .map(|j| (dist(&pts[i], &pts[j]), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().take(k).map(|o| o.1).collect()
}

#[test]
fn k_nearest_graph_matches_brute_force() {
    for seed in 0..20 {
        let pts = points(seed, 10, 2);
        let g = gen_rgg_on(&pts, RggKind::KNearest { k: 3 }, 2);
        let mut want = HashSet::new();
        for i in 0..pts.len() {
            for j in brute_knn(&pts, i, 3) {
                want.insert((i.min(j), i.max(j)));
            }
        }
        assert_eq!(edge_set(&g), want);
    }
    // larger instance in 3-d
    let pts = points(99, 300, 3);
    let g = gen_rgg_on(&pts, RggKind::KNearest { k: 7 }, 3);
    let mut want = HashSet::new();
    for i in 0..pts.len() {
        for j in brute_knn(&pts, i, 7) {
            want.insert((i.min(j), i.max(j)));
        }
    }
    assert_eq!(edge_set(&g), want);
}

#[test]
fn r_disc_graph_uses_strict_inequality() {
    let pts = points(5, 400, 2);
    let r = 0.08;
    let g = gen_rgg_on(&pts, RggKind::RDisc { r }, 2);
    let mut want = HashSet::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if dist(&pts[i], &pts[j]) < r {
                want.insert((i, j));
            }
        }
    }
    assert_eq!(edge_set(&g), want);

    // two points at exactly distance r are not joined
    let pair = vec![
        Point::new(vec![0.25, 0.5]).unwrap(),
        Point::new(vec![0.75, 0.5]).unwrap(),
    ];
    assert_eq!(gen_rgg_on(&pair, RggKind::RDisc { r: 0.5 }, 2).edge_count(), 0);

    let g = gen_rgg_on(&pts[..50], RggKind::RDisc { r: 1.5 }, 2);
    assert_eq!(g.undirected_edges().len(), 50 * 49 / 2);
}

#[test]
fn relations_are_symmetric() {
    let pts = points(6, 300, 2);
    for kind in [RggKind::RDisc { r: 0.1 }, RggKind::KNearest { k: 4 }, RggKind::OnlineNn] {
        let g = gen_rgg_on(&pts, kind, 2);
        for (u, v, c) in g.edges() {
            assert!(g.out_edges(v).iter().any(|e| e.to == u && e.cost == c));
        }
    }
}

#[test]
fn online_nn_is_a_spanning_tree_to_earlier_points() {
    let pts = points(7, 500, 3);
    let g = gen_rgg_on(&pts, RggKind::OnlineNn, 3);
    assert_eq!(g.undirected_edges().len(), 499);
    assert_eq!(g.component_count(), 1);
    for j in 1..pts.len() {
        let nearest = (0..j)
            .min_by(|&a, &b| {
                dist(&pts[a], &pts[j])
                    .total_cmp(&dist(&pts[b], &pts[j]))
                    .then(a.cmp(&b))
            })
            .unwrap();
        assert!(g.out_edges(j).iter().any(|e| e.to == nearest));
    }
}

#[test]
fn threshold_radius_identity() {
    for n in [2usize, 10, 1000, 123_456] {
        for d in 2..6 {
            let r = connectivity_threshold_radius(n, d);
            let lhs = unit_ball_volume(d) * r.powi(d as i32) * n as f64 / (n as f64).ln();
            assert!((lhs - 1.0).abs() < 1e-12);
        }
    }
    let oracle = (1000f64.ln() / (std::f64::consts::PI * 1000.0)).sqrt();
    let r = connectivity_threshold_radius(1000, 2);
    assert!((r - oracle).abs() < 1e-15);
    assert!((r - 0.046893).abs() < 5e-6);
    let mut last = f64::INFINITY;
    for n in 3..3000 {
        let r = connectivity_threshold_radius(n, 2);
        assert!(r < last);
        last = r;
    }
}

#[test]
fn poissonized_counts_average_to_n() {
    let model = RggModel {
        kind: RggKind::OnlineNn,
        d: 2,
        n: 200,
        poissonized: true,
    };
    let mut rng = RngStream::new(8);
    let trials = 10_000;
    let total: usize = (0..trials)
        .map(|_| gen_rgg(&model, &mut rng).unwrap().vertex_count())
        .sum();
    let mean = total as f64 / trials as f64;
    assert!((mean - 200.0).abs() < 2.0, "mean {mean}");
}

#[test]
fn invalid_models_are_rejected() {
    let bad = |kind| {
        RggModel {
            kind,
            d: 2,
            n: 10,
            poissonized: false,
        }
        .validate()
        .is_err()
    };
    assert!(bad(RggKind::RDisc { r: 0.0 }));
    assert!(bad(RggKind::RDisc { r: f64::NAN }));
    assert!(bad(RggKind::KNearest { k: 0 }));
}

#[test]
fn thermodynamic_fractions_straddle_percolation() {
    let rows = sweep(&SweepConfig {
        family: ModelFamily::RDisc,
        d: 2,
        n: 5000,
        params: vec![0.696, 3.372],
        scale: ParamScale::Lambda,
        trials: 50,
        poissonized: false,
        seed: 9,
        threads: 1,
    })
    .unwrap();
    assert!(rows[1].mean_lcc_fraction - rows[0].mean_lcc_fraction >= 0.2, "{rows:?}");
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let config = |threads| SweepConfig {
        family: ModelFamily::KNearest,
        d: 2,
        n: 300,
        params: vec![0.3, 0.6, 1.0],
        scale: ParamScale::LogN,
        trials: 20,
        poissonized: true,
        seed: 10,
        threads,
    };
    let one = sweep(&config(1)).unwrap();
    let four = sweep(&config(4)).unwrap();
    assert_eq!(one, four);
    for r in &one {
        assert!((0.0..=1.0).contains(&r.p_connected));
        assert!(r.se >= 0.0);
        assert!(r.mean_lcc_fraction > 0.0 && r.mean_lcc_fraction <= 1.0);
    }
    // more neighbors never hurt on a shared point set
    assert!(one[2].mean_lcc_fraction >= one[0].mean_lcc_fraction);
}
