//! Exact incremental nearest-neighbor index over a growing vertex set.
//!
//! A bucketed kd-tree: inserts descend to a leaf and split it once it holds
//! more than `LEAF_CAPACITY` points; the whole tree is rebuilt balanced each
//! time the number of points doubles. All queries are exact and break distance
//! ties by the smaller vertex id.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::geometry::distance_sq;

const LEAF_CAPACITY: usize = 12;
const FIRST_REBUILD: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("vertex id {0} is already in the index")]
    DuplicateId(usize),
    #[error("point has dimension {found}, index has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the index is empty")]
    Empty,
}

/// A query result: vertex id and its Euclidean distance to the query point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(Vec<u32>),
    Split {
        axis: usize,
        value: f64,
        lower: u32,
        upper: u32,
    },
}

#[derive(Clone, Debug)]
pub struct VertexIndex {
    dim: usize,
    coords: Vec<f64>,
    ids: Vec<usize>,
    slot_of: HashMap<usize, u32>,
    nodes: Vec<Node>,
    next_rebuild: usize,
}

/// Candidate ordered by (squared distance, id); the heap keeps the worst on top.
#[derive(Clone, Copy, Debug)]
struct Candidate {
    dist_sq: f64,
    id: usize,
}

impl Candidate {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.dist_sq.total_cmp(&other.dist_sq).then(self.id.cmp(&other.id))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

impl VertexIndex {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
            ids: Vec::new(),
            slot_of: HashMap::new(),
            nodes: vec![Node::Leaf(Vec::new())],
            next_rebuild: FIRST_REBUILD,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.slot_of.contains_key(&id)
    }

    /// Coordinates stored for `id`.
    pub fn coords_of(&self, id: usize) -> Option<&[f64]> {
        self.slot_of.get(&id).map(|&s| self.slot_coords(s))
    }

    #[inline]
    fn slot_coords(&self, slot: u32) -> &[f64] {
        let start = slot as usize * self.dim;
        &self.coords[start..start + self.dim]
    }

    pub fn insert(&mut self, point: &[f64], id: usize) -> Result<(), IndexError> {
        if point.len() != self.dim {
            return Err(IndexError::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        if self.slot_of.contains_key(&id) {
            return Err(IndexError::DuplicateId(id));
        }
        let slot = self.ids.len() as u32;
        self.coords.extend_from_slice(point);
        self.ids.push(id);
        self.slot_of.insert(id, slot);

        if self.ids.len() >= self.next_rebuild {
            self.rebuild();
            self.next_rebuild = self.ids.len() * 2;
            return Ok(());
        }

        let mut node = 0usize;
        loop {
            match &mut self.nodes[node] {
                Node::Split {
                    axis,
                    value,
                    lower,
                    upper,
                } => {
                    node = if point[*axis] < *value { *lower } else { *upper } as usize;
                }
                Node::Leaf(items) => {
                    items.push(slot);
                    if items.len() > LEAF_CAPACITY {
                        let items = std::mem::take(items);
                        self.split_leaf(node, items);
                    }
                    return Ok(());
                }
            }
        }
    }

    /// Picks the axis of largest spread and a split value that leaves both
    /// sides non-empty. `None` when all points coincide.
    fn choose_split(&self, items: &mut [u32]) -> Option<(usize, f64)> {
        let mut best_axis = 0;
        let mut best_spread = 0.0;
        for axis in 0..self.dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &s in items.iter() {
                let v = self.slot_coords(s)[axis];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_axis = axis;
            }
        }
        if best_spread <= 0.0 {
            return None;
        }
        let mut values: Vec<f64> = items.iter().map(|&s| self.slot_coords(s)[best_axis]).collect();
        values.sort_by(f64::total_cmp);
        let mut value = values[values.len() / 2];
        if value == values[0] {
            // Median equals the minimum: split just above it instead.
            value = *values.iter().find(|&&v| v > values[0])?;
        }
        Some((best_axis, value))
    }

    fn split_leaf(&mut self, node: usize, mut items: Vec<u32>) {
        let Some((axis, value)) = self.choose_split(&mut items) else {
            self.nodes[node] = Node::Leaf(items);
            return;
        };
        let (low, high): (Vec<u32>, Vec<u32>) = items.into_iter().partition(|&s| self.slot_coords(s)[axis] < value);
        let lower = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf(low));
        self.nodes.push(Node::Leaf(high));
        self.nodes[node] = Node::Split {
            axis,
            value,
            lower,
            upper: lower + 1,
        };
    }

    fn rebuild(&mut self) {
        let items: Vec<u32> = (0..self.ids.len() as u32).collect();
        self.nodes.clear();
        self.nodes.push(Node::Leaf(Vec::new()));
        self.build_balanced(0, items);
    }

    fn build_balanced(&mut self, node: usize, mut items: Vec<u32>) {
        if items.len() <= LEAF_CAPACITY {
            self.nodes[node] = Node::Leaf(items);
            return;
        }
        let Some((axis, value)) = self.choose_split(&mut items) else {
            self.nodes[node] = Node::Leaf(items);
            return;
        };
        let (low, high): (Vec<u32>, Vec<u32>) = items.into_iter().partition(|&s| self.slot_coords(s)[axis] < value);
        let lower = self.nodes.len();
        self.nodes.push(Node::Leaf(Vec::new()));
        self.nodes.push(Node::Leaf(Vec::new()));
        self.nodes[node] = Node::Split {
            axis,
            value,
            lower: lower as u32,
            upper: lower as u32 + 1,
        };
        self.build_balanced(lower, low);
        self.build_balanced(lower + 1, high);
    }

    fn check_query(&self, x: &[f64]) {
        assert_eq!(x.len(), self.dim, "query point has the wrong dimension");
    }

    /// The closest vertex to `x`, smallest id on ties.
    pub fn nearest(&self, x: &[f64]) -> Result<Neighbor, IndexError> {
        self.check_query(x);
        if self.is_empty() {
            return Err(IndexError::Empty);
        }
        let mut best = Candidate {
            dist_sq: f64::INFINITY,
            id: usize::MAX,
        };
        let mut stack = vec![(0usize, 0.0f64)];
        while let Some((node, plane_sq)) = stack.pop() {
            if plane_sq > best.dist_sq {
                continue;
            }
            match &self.nodes[node] {
                Node::Leaf(items) => {
                    for &s in items {
                        let c = Candidate {
                            dist_sq: distance_sq(self.slot_coords(s), x),
                            id: self.ids[s as usize],
                        };
                        if c < best {
                            best = c;
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    lower,
                    upper,
                } => {
                    let diff = x[*axis] - value;
                    let (near, far) = if diff < 0.0 { (lower, upper) } else { (upper, lower) };
                    stack.push((*far as usize, diff * diff));
                    stack.push((*near as usize, 0.0));
                }
            }
        }
        Ok(Neighbor {
            id: best.id,
            distance: best.dist_sq.sqrt(),
        })
    }

    /// The `k` closest vertices in ascending (distance, id) order; every vertex
    /// when fewer than `k` are stored.
    pub fn k_nearest(&self, x: &[f64], k: usize) -> Vec<Neighbor> {
        self.check_query(x);
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        let mut stack = vec![(0usize, 0.0f64)];
        while let Some((node, plane_sq)) = stack.pop() {
            if heap.len() == k && plane_sq > heap.peek().map_or(f64::INFINITY, |c| c.dist_sq) {
                continue;
            }
            match &self.nodes[node] {
                Node::Leaf(items) => {
                    for &s in items {
                        let c = Candidate {
                            dist_sq: distance_sq(self.slot_coords(s), x),
                            id: self.ids[s as usize],
                        };
                        if heap.len() < k {
                            heap.push(c);
                        } else if c < *heap.peek().expect("heap is full") {
                            heap.pop();
                            heap.push(c);
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    lower,
                    upper,
                } => {
                    let diff = x[*axis] - value;
                    let (near, far) = if diff < 0.0 { (lower, upper) } else { (upper, lower) };
                    stack.push((*far as usize, diff * diff));
                    stack.push((*near as usize, 0.0));
                }
            }
        }
        heap.into_sorted_vec()
            .into_iter()
            .map(|c| Neighbor {
                id: c.id,
                distance: c.dist_sq.sqrt(),
            })
            .collect()
    }

    /// Every vertex in the closed ball of radius `r` around `x`, ascending by
    /// (distance, id).
    pub fn near(&self, x: &[f64], r: f64) -> Vec<Neighbor> {
        self.check_query(x);
        // Membership is decided on the rounded distance itself so that a point
        // reported at distance `r` by any query is inside `near(x, r)`.
        let mut found: Vec<Candidate> = Vec::new();
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            match &self.nodes[node] {
                Node::Leaf(items) => {
                    for &s in items {
                        let dist_sq = distance_sq(self.slot_coords(s), x);
                        if dist_sq.sqrt() <= r {
                            found.push(Candidate {
                                dist_sq,
                                id: self.ids[s as usize],
                            });
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    lower,
                    upper,
                } => {
                    let diff = x[*axis] - value;
                    let (near, far) = if diff < 0.0 { (lower, upper) } else { (upper, lower) };
                    if diff.abs() <= r {
                        stack.push(*far as usize);
                    }
                    stack.push(*near as usize);
                }
            }
        }
        found.sort_unstable();
        found
            .into_iter()
            .map(|c| Neighbor {
                id: c.id,
                distance: c.dist_sq.sqrt(),
            })
            .collect()
    }

    /// Depth of the deepest leaf; exposed for balance checks.
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], node: usize) -> usize {
            match &nodes[node] {
                Node::Leaf(_) => 1,
                Node::Split { lower, upper, .. } => 1 + go(nodes, *lower as usize).max(go(nodes, *upper as usize)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_then_find_self() {
        let mut idx = VertexIndex::new(2);
        idx.insert(&[0.3, 0.7], 5).unwrap();
        let n = idx.nearest(&[0.3, 0.7]).unwrap();
        assert_eq!(n, Neighbor { id: 5, distance: 0.0 });
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.insert(&[0.1, 0.1], 5), Err(IndexError::DuplicateId(5)));
        assert!(matches!(
            idx.insert(&[0.1], 6),
            Err(IndexError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_index() {
        let idx = VertexIndex::new(3);
        assert_eq!(idx.nearest(&[0.0, 0.0, 0.0]), Err(IndexError::Empty));
        assert!(idx.k_nearest(&[0.0, 0.0, 0.0], 3).is_empty());
        assert!(idx.near(&[0.0, 0.0, 0.0], 1.0).is_empty());
    }

    #[test]
    fn nearest_examples() {
        let mut idx = VertexIndex::new(2);
        idx.insert(&[0.0, 0.0], 0).unwrap();
        idx.insert(&[1.0, 1.0], 1).unwrap();
        assert_eq!(idx.nearest(&[0.1, 0.0]).unwrap().id, 0);

        let mut idx = VertexIndex::new(2);
        idx.insert(&[0.75, 0.5], 7).unwrap();
        idx.insert(&[0.25, 0.5], 3).unwrap();
        assert_eq!(idx.nearest(&[0.5, 0.5]).unwrap().id, 3);
    }

    #[test]
    fn k_nearest_examples() {
        let mut idx = VertexIndex::new(2);
        for (i, p) in [[0.1, 0.1], [0.2, 0.2], [0.9, 0.9]].iter().enumerate() {
            idx.insert(p, i).unwrap();
        }
        let all = idx.k_nearest(&[0.0, 0.0], 5);
        assert_eq!(all.iter().map(|n| n.id).collect::<Vec<_>>(), vec![0, 1, 2]);
        let one = idx.k_nearest(&[0.85, 0.8], 1);
        assert_eq!(one[0].id, idx.nearest(&[0.85, 0.8]).unwrap().id);
    }

    #[test]
    fn near_examples() {
        let mut idx = VertexIndex::new(2);
        idx.insert(&[0.0, 0.0], 0).unwrap();
        idx.insert(&[0.5, 0.0], 1).unwrap();
        let hits = idx.near(&[0.0, 0.0], 0.3);
        assert_eq!(hits.iter().map(|n| n.id).collect::<Vec<_>>(), vec![0]);
        assert_eq!(idx.near(&[0.0, 0.0], 2f64.sqrt() + 0.1).len(), 2);
        // Closed ball: a vertex exactly at distance r is included.
        assert_eq!(idx.near(&[0.0, 0.0], 0.5).len(), 2);
    }

    #[test]
    fn duplicate_points_do_not_break_splitting() {
        let mut idx = VertexIndex::new(2);
        for i in 0..200 {
            idx.insert(&[0.5, 0.5], i).unwrap();
        }
        assert_eq!(idx.nearest(&[0.4, 0.4]).unwrap().id, 0);
        assert_eq!(idx.near(&[0.5, 0.5], 1e-9).len(), 200);
        let k = idx.k_nearest(&[0.5, 0.5], 4);
        assert_eq!(k.iter().map(|n| n.id).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }
}
