//! Sampling-based motion planning: PRM, RRT and their asymptotically optimal
//! variants PRM*, RRG and RRT*, together with random geometric graph
//! experiments and a Monte Carlo benchmark harness.

// Validation is written as `!(a < b)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod geometry;
pub mod graph;
pub mod planners;
pub mod presets;
pub mod rgg;
pub mod sampling;
pub mod spatial;

pub use geometry::{Aabb, CostRegion, GeometryError, PathPolyline, Point, Scenario};
pub use graph::{shortest_path, GraphDump, QueryResult, RoadmapGraph};
pub use planners::{plan, run, Algorithm, PlanError, PlanOutput, PlannerSpec, RunTrace, Schedule};
pub use sampling::RngStream;
pub use spatial::VertexIndex;
