//! Brute-force oracles shared by the property suites and the acceptance run.
#![allow(dead_code)]

use samplan::{Aabb, RngStream, RoadmapGraph};

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// A random box of side at least 0.02 inside the unit cube.
pub fn random_box(rng: &mut RngStream, d: usize) -> Aabb {
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for _ in 0..d {
        let a = rng.uniform();
        let b = rng.uniform();
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let b = if b - a < 0.02 { (a + 0.02).min(1.0) } else { b };
        let a = if b - a < 0.02 { b - 0.02 } else { a };
        lo.push(a);
        hi.push(b);
    }
    Aabb::from_corners(&lo, &hi).unwrap()
}

/// Positive inside the open box, negative outside, zero on its boundary.
pub fn depth(b: &Aabb, p: &[f64]) -> f64 {
    p.iter()
        .zip(b.lo().coords().iter().zip(b.hi().coords()))
        .map(|(x, (lo, hi))| (x - lo).min(hi - x))
        .fold(f64::INFINITY, f64::min)
}

/// Largest sampled depth along `[a, c]`, stepping by `step` in arc length.
pub fn max_depth_along(b: &Aabb, a: &[f64], c: &[f64], step: f64) -> f64 {
    let n = ((dist(a, c) / step).ceil() as usize).max(1);
    let mut p = vec![0.0; a.len()];
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        for (q, (x, y)) in p.iter_mut().zip(a.iter().zip(c)) {
            *q = x + t * (y - x);
        }
        best = best.max(depth(b, &p));
    }
    best
}

/// Segment check by dense sampling. `None` when the segment grazes a box
/// within `band`, where sampling cannot be trusted.
pub fn sampled_segment_free(boxes: &[Aabb], a: &[f64], b: &[f64], band: f64) -> Option<bool> {
    let depths: Vec<f64> = boxes.iter().map(|bx| max_depth_along(bx, a, b, 1e-4)).collect();
    if depths.iter().any(|d| d.abs() < band) {
        return None;
    }
    Some(depths.iter().all(|&d| d < 0.0))
}

/// Every point as (distance to `x`, index), sorted with the index as tiebreak.
pub fn scan(points: &[Vec<f64>], x: &[f64]) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = points.iter().enumerate().map(|(i, p)| (dist(p, x), i)).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all
}

pub fn bellman_ford(n: usize, edges: &[(usize, usize, f64)], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for &(u, v, c) in edges {
            if dist[u] + c < dist[v] {
                dist[v] = dist[u] + c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// A roadmap over `n` random points with up to `m` random weighted edges.
pub fn random_roadmap(rng: &mut RngStream, n: usize, m: usize) -> RoadmapGraph {
    let mut g = RoadmapGraph::roadmap(2);
    for _ in 0..n {
        g.add_vertex(rng.sample_uniform(2)).unwrap();
    }
    for _ in 0..m {
        let u = (rng.next_u64() % n as u64) as usize;
        let v = (rng.next_u64() % n as u64) as usize;
        if u != v {
            g.add_undirected_edge(u, v, 0.01 + rng.uniform()).unwrap();
        }
    }
    g
}
