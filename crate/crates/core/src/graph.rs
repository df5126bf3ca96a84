//! Roadmap and tree storage, connected components, and the shortest-path
//! query phase.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PathPolyline, Point};

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {0} does not exist")]
    UnknownVertex(VertexId),
    #[error("operation requires a tree")]
    NotATree,
    #[error("operation is not allowed on a tree")]
    IsATree,
    #[error("edge cost {0} is not a non-negative finite number")]
    InvalidCost(f64),
    #[error("re-parenting {child} under {parent} would create a cycle")]
    WouldCycle { parent: VertexId, child: VertexId },
    #[error("vertex has dimension {found}, graph has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed graph dump: {0}")]
    MalformedDump(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub to: VertexId,
    pub cost: f64,
}

/// Disjoint sets with union by size and path halving.
#[derive(Clone, Debug, Default)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    largest: usize,
    count: usize,
}

impl UnionFind {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.size.push(1);
        self.largest = self.largest.max(1);
        self.count += 1;
        id
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Root of `x` without compressing; depth is O(log n) under union by size.
    pub fn root(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn find_mut(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find_mut(a), self.find_mut(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.largest = self.largest.max(self.size[ra]);
        self.count -= 1;
        true
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.root(a) == self.root(b)
    }

    pub fn component_count(&self) -> usize {
        self.count
    }

    pub fn largest_size(&self) -> usize {
        self.largest
    }
}

/// A roadmap (symmetric directed edge pairs) or a tree (edges parent → child).
#[derive(Clone, Debug)]
pub struct RoadmapGraph {
    dim: usize,
    vertices: Vec<Point>,
    out_edges: Vec<Vec<Edge>>,
    edge_count: usize,
    tree: Option<TreeLinks>,
    components: UnionFind,
}

#[derive(Clone, Debug)]
struct TreeLinks {
    parent: Vec<VertexId>,
    parent_cost: Vec<f64>,
}

impl RoadmapGraph {
    /// An empty undirected roadmap.
    pub fn roadmap(dim: usize) -> Self {
        Self {
            dim,
            vertices: Vec::new(),
            out_edges: Vec::new(),
            edge_count: 0,
            tree: None,
            components: UnionFind::new(),
        }
    }

    /// A tree holding only its root (vertex 0), whose parent is itself.
    pub fn tree(root: Point) -> Self {
        let mut g = Self::roadmap(root.dim());
        g.tree = Some(TreeLinks {
            parent: vec![0],
            parent_cost: vec![0.0],
        });
        g.vertices.push(root);
        g.out_edges.push(Vec::new());
        g.components.push();
        g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_tree(&self) -> bool {
        self.tree.is_some()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of directed edges.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn point(&self, v: VertexId) -> &Point {
        &self.vertices[v]
    }

    pub fn out_edges(&self, v: VertexId) -> &[Edge] {
        &self.out_edges[v]
    }

    /// All directed edges as `(from, to, cost)`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.out_edges
            .iter()
            .enumerate()
            .flat_map(|(u, es)| es.iter().map(move |e| (u, e.to, e.cost)))
    }

    /// Undirected edges `{u, v}` with `u < v`, sorted.
    pub fn undirected_edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out: Vec<(VertexId, VertexId)> = self.edges().map(|(u, v, _)| (u.min(v), u.max(v))).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.vertices.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    fn check_cost(cost: f64) -> Result<(), GraphError> {
        if cost >= 0.0 && cost.is_finite() {
            Ok(())
        } else {
            Err(GraphError::InvalidCost(cost))
        }
    }

    pub fn add_vertex(&mut self, p: Point) -> Result<VertexId, GraphError> {
        if self.is_tree() {
            return Err(GraphError::IsATree);
        }
        self.push_vertex(p)
    }

    fn push_vertex(&mut self, p: Point) -> Result<VertexId, GraphError> {
        if p.dim() != self.dim {
            return Err(GraphError::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        self.vertices.push(p);
        self.out_edges.push(Vec::new());
        Ok(self.components.push())
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.out_edges.get(u).is_some_and(|es| es.iter().any(|e| e.to == v))
    }

    /// Adds `(u, v)` and `(v, u)`. Returns false when the pair already existed.
    pub fn add_undirected_edge(&mut self, u: VertexId, v: VertexId, cost: f64) -> Result<bool, GraphError> {
        if self.is_tree() {
            return Err(GraphError::IsATree);
        }
        self.check(u)?;
        self.check(v)?;
        Self::check_cost(cost)?;
        if self.has_edge(u, v) {
            return Ok(false);
        }
        self.out_edges[u].push(Edge { to: v, cost });
        self.out_edges[v].push(Edge { to: u, cost });
        self.edge_count += 2;
        self.components.union(u, v);
        Ok(true)
    }

    /// Adds a new tree vertex under `parent`.
    pub fn add_child(&mut self, parent: VertexId, p: Point, cost: f64) -> Result<VertexId, GraphError> {
        if !self.is_tree() {
            return Err(GraphError::NotATree);
        }
        self.check(parent)?;
        Self::check_cost(cost)?;
        let child = self.push_vertex(p)?;
        let links = self.tree.as_mut().expect("checked above");
        links.parent.push(parent);
        links.parent_cost.push(cost);
        self.out_edges[parent].push(Edge { to: child, cost });
        self.edge_count += 1;
        self.components.union(parent, child);
        Ok(child)
    }

    /// Replaces the parent edge of `child` (the tree rewiring step).
    pub fn reparent(&mut self, child: VertexId, new_parent: VertexId, cost: f64) -> Result<(), GraphError> {
        self.check(child)?;
        self.check(new_parent)?;
        Self::check_cost(cost)?;
        let links = self.tree.as_ref().ok_or(GraphError::NotATree)?;
        if child == 0 {
            return Err(GraphError::WouldCycle {
                parent: new_parent,
                child,
            });
        }
        // new_parent must not lie in the subtree of child.
        let mut v = new_parent;
        while v != 0 {
            if v == child {
                return Err(GraphError::WouldCycle {
                    parent: new_parent,
                    child,
                });
            }
            v = links.parent[v];
        }
        let old = links.parent[child];
        let pos = self.out_edges[old]
            .iter()
            .position(|e| e.to == child)
            .expect("tree edge parent -> child exists");
        self.out_edges[old].swap_remove(pos);
        self.out_edges[new_parent].push(Edge { to: child, cost });
        let links = self.tree.as_mut().expect("checked above");
        links.parent[child] = new_parent;
        links.parent_cost[child] = cost;
        Ok(())
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.tree.as_ref().map(|t| t.parent[v])
    }

    /// Cost of the edge from `v`'s parent to `v`.
    pub fn parent_cost(&self, v: VertexId) -> Option<f64> {
        self.tree.as_ref().map(|t| t.parent_cost[v])
    }

    pub fn parents(&self) -> Option<&[VertexId]> {
        self.tree.as_ref().map(|t| t.parent.as_slice())
    }

    /// Undirected connectivity, maintained incrementally.
    pub fn same_component(&self, u: VertexId, v: VertexId) -> Result<bool, GraphError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.components.same(u, v))
    }

    pub fn component_count(&self) -> usize {
        self.components.component_count()
    }

    /// Size of the largest undirected component over the vertex count.
    pub fn largest_component_fraction(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        self.components.largest_size() as f64 / self.vertices.len() as f64
    }

    /// Cost of the root-to-`v` tree path, recomputed from the parent links.
    pub fn tree_cost_of(&self, v: VertexId) -> Result<f64, GraphError> {
        let links = self.tree.as_ref().ok_or(GraphError::NotATree)?;
        self.check(v)?;
        let mut chain = Vec::new();
        let mut cur = v;
        while cur != 0 {
            chain.push(cur);
            cur = links.parent[cur];
            if chain.len() > self.vertices.len() {
                return Err(GraphError::WouldCycle { parent: cur, child: v });
            }
        }
        // Summed from the root down, the same order incremental planners use.
        Ok(chain.iter().rev().fold(0.0, |acc, &u| acc + links.parent_cost[u]))
    }

    /// Checks the tree invariants: root is its own parent, every other vertex
    /// has one parent edge, and every vertex reaches the root.
    pub fn validate_tree(&self) -> Result<(), GraphError> {
        let links = self.tree.as_ref().ok_or(GraphError::NotATree)?;
        let n = self.vertices.len();
        if links.parent.first() != Some(&0) {
            return Err(GraphError::MalformedDump("root must be its own parent".into()));
        }
        let mut in_degree = vec![0usize; n];
        for (u, v, _) in self.edges() {
            if links.parent[v] != u {
                return Err(GraphError::MalformedDump(format!("edge {u}->{v} is not a parent link")));
            }
            in_degree[v] += 1;
        }
        if in_degree[0] != 0 || in_degree[1..].iter().any(|&d| d != 1) {
            return Err(GraphError::MalformedDump("parent edges are not unique".into()));
        }
        for v in 0..n {
            self.tree_cost_of(v)?;
        }
        Ok(())
    }

    pub fn to_dump(&self) -> GraphDump {
        GraphDump {
            vertices: self.vertices.iter().map(|p| p.coords().to_vec()).collect(),
            edges: self.edges().collect(),
            parent: self.parents().map(<[_]>::to_vec).unwrap_or_default(),
        }
    }

    pub fn from_dump(dump: &GraphDump) -> Result<Self, GraphError> {
        let bad = |e: crate::geometry::GeometryError| GraphError::MalformedDump(e.to_string());
        let dim = dump.vertices.first().map_or(2, Vec::len);
        let points = dump
            .vertices
            .iter()
            .map(|c| Point::new(c.clone()).map_err(bad))
            .collect::<Result<Vec<_>, _>>()?;
        if dump.parent.is_empty() {
            let mut g = Self::roadmap(dim);
            for p in points {
                g.add_vertex(p)?;
            }
            for &(u, v, c) in &dump.edges {
                g.check(u)?;
                g.check(v)?;
                Self::check_cost(c)?;
                if !g.has_edge(u, v) {
                    g.out_edges[u].push(Edge { to: v, cost: c });
                    g.edge_count += 1;
                    g.components.union(u, v);
                }
            }
            return Ok(g);
        }
        if dump.parent.len() != points.len() || points.is_empty() {
            return Err(GraphError::MalformedDump(
                "parent list length differs from vertex count".into(),
            ));
        }
        let mut points = points.into_iter();
        let mut g = Self::tree(points.next().expect("non-empty"));
        for p in points {
            g.push_vertex(p)?;
        }
        let mut parent_cost = vec![0.0; g.vertices.len()];
        for &(u, v, c) in &dump.edges {
            g.check(u)?;
            g.check(v)?;
            Self::check_cost(c)?;
            g.out_edges[u].push(Edge { to: v, cost: c });
            g.edge_count += 1;
            g.components.union(u, v);
            parent_cost[v] = c;
        }
        g.tree = Some(TreeLinks {
            parent: dump.parent.clone(),
            parent_cost,
        });
        g.validate_tree()?;
        Ok(g)
    }
}

/// JSON form of a graph for offline rendering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub vertices: Vec<Vec<f64>>,
    pub edges: Vec<(VertexId, VertexId, f64)>,
    #[serde(default)]
    pub parent: Vec<VertexId>,
}

/// Outcome of the query phase.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub path: Option<PathPolyline>,
    pub vertices: Vec<VertexId>,
    pub cost: f64,
}

impl QueryResult {
    pub fn unreachable() -> Self {
        Self {
            path: None,
            vertices: Vec::new(),
            cost: f64::INFINITY,
        }
    }

    pub fn is_found(&self) -> bool {
        self.path.is_some()
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapKey(f64, VertexId);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Dijkstra from `source` to the cheapest vertex satisfying `is_goal`.
pub fn shortest_path(
    g: &RoadmapGraph,
    source: VertexId,
    is_goal: impl Fn(&Point) -> bool,
) -> Result<QueryResult, GraphError> {
    g.check(source)?;
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse(HeapKey(0.0, source)));
    while let Some(Reverse(HeapKey(d, u))) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if is_goal(g.point(u)) {
            let mut vertices = vec![u];
            while let Some(&last) = vertices.last() {
                if last == source {
                    break;
                }
                vertices.push(pred[last]);
            }
            vertices.reverse();
            let path = PathPolyline::new(vertices.iter().map(|&v| g.point(v).clone()).collect())
                .expect("path has at least the source");
            return Ok(QueryResult {
                path: Some(path),
                vertices,
                cost: d,
            });
        }
        for e in g.out_edges(u) {
            let cand = d + e.cost;
            if cand < dist[e.to] {
                dist[e.to] = cand;
                pred[e.to] = u;
                heap.push(Reverse(HeapKey(cand, e.to)));
            }
        }
    }
    Ok(QueryResult::unreachable())
}

/// Root distances kept exact under edge insertions.
///
/// Inserting edges only shortens distances, so each insertion relaxes outward
/// from the improved endpoint in Dijkstra order. The best cost over goal
/// vertices is tracked as distances fall.
#[derive(Clone, Debug)]
pub struct IncrementalDistances {
    dist: Vec<f64>,
    in_goal: Vec<bool>,
    best: f64,
}

impl IncrementalDistances {
    pub fn new() -> Self {
        Self {
            dist: Vec::new(),
            in_goal: Vec::new(),
            best: f64::INFINITY,
        }
    }

    /// Registers the next vertex; the first one becomes the root.
    pub fn push_vertex(&mut self, in_goal: bool) {
        let d = if self.dist.is_empty() { 0.0 } else { f64::INFINITY };
        self.dist.push(d);
        self.in_goal.push(in_goal);
        if in_goal && d < self.best {
            self.best = d;
        }
    }

    pub fn distance(&self, v: VertexId) -> f64 {
        self.dist[v]
    }

    pub fn best_goal_cost(&self) -> f64 {
        self.best
    }

    /// Call after `{u, v}` was added to `g` with the given cost.
    pub fn edge_added(&mut self, g: &RoadmapGraph, u: VertexId, v: VertexId, cost: f64) {
        let mut heap = BinaryHeap::new();
        for (a, b) in [(u, v), (v, u)] {
            let cand = self.dist[a] + cost;
            if cand < self.dist[b] {
                self.lower(b, cand);
                heap.push(Reverse(HeapKey(cand, b)));
            }
        }
        while let Some(Reverse(HeapKey(d, x))) = heap.pop() {
            if d > self.dist[x] {
                continue;
            }
            for e in g.out_edges(x) {
                let cand = d + e.cost;
                if cand < self.dist[e.to] {
                    self.lower(e.to, cand);
                    heap.push(Reverse(HeapKey(cand, e.to)));
                }
            }
        }
    }

    fn lower(&mut self, v: VertexId, d: f64) {
        self.dist[v] = d;
        if self.in_goal[v] && d < self.best {
            self.best = d;
        }
    }
}

impl Default for IncrementalDistances {
    fn default() -> Self {
        Self::new()
    }
}
