//! Built-in scenarios used by the experiments and the acceptance suite. The
//! same scenarios ship as JSON under `scenarios/`.

use crate::geometry::{Aabb, CostRegion, Point, Scenario};

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 5] = ["open_square", "central_obstacle", "open_5d", "cluttered", "cost_field"];

/// A named scenario with its optimal cost when known in closed form.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub scenario: Scenario,
    pub optimal_cost: Option<f64>,
}

pub fn by_name(name: &str) -> Option<Preset> {
    Some(match name {
        "open_square" => Preset {
            name: "open_square",
            scenario: open_square(),
            optimal_cost: Some(open_square_optimum()),
        },
        "central_obstacle" => Preset {
            name: "central_obstacle",
            scenario: central_obstacle(),
            optimal_cost: Some(central_obstacle_optimum()),
        },
        "open_5d" => Preset {
            name: "open_5d",
            scenario: open_cube(5),
            optimal_cost: Some(open_cube_optimum(5)),
        },
        "cluttered" => Preset {
            name: "cluttered",
            scenario: cluttered(),
            optimal_cost: None,
        },
        "cost_field" => Preset {
            name: "cost_field",
            scenario: cost_field(),
            optimal_cost: None,
        },
        _ => return None,
    })
}

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).expect("preset coordinates are valid")
}

fn aabb(lo: &[f64], hi: &[f64]) -> Aabb {
    Aabb::from_corners(lo, hi).expect("preset boxes are valid")
}

/// Obstacle-free unit square, start (0.1, 0.1), goal [0.85, 0.95]².
pub fn open_square() -> Scenario {
    Scenario::open(2, pt(&[0.1, 0.1]), aabb(&[0.85, 0.85], &[0.95, 0.95])).expect("valid preset")
}

/// Straight line from the start to the goal corner (0.85, 0.85).
pub fn open_square_optimum() -> f64 {
    0.75 * 2f64.sqrt()
}

/// Start (0.1, 0.5) and goal [0.85, 0.95] × [0.45, 0.55] separated by the
/// obstacle [0.4, 0.6] × [0.25, 0.75].
pub fn central_obstacle() -> Scenario {
    Scenario::new(
        2,
        vec![aabb(&[0.4, 0.25], &[0.6, 0.75])],
        pt(&[0.1, 0.5]),
        aabb(&[0.85, 0.45], &[0.95, 0.55]),
        Vec::new(),
    )
    .expect("valid preset")
}

/// The taut path around either obstacle corner pair:
/// start → (0.4, 0.25) → (0.6, 0.25) → goal corner (0.85, 0.45).
pub fn central_obstacle_optimum() -> f64 {
    (0.3f64.powi(2) + 0.25f64.powi(2)).sqrt() + 0.2 + (0.25f64.powi(2) + 0.2f64.powi(2)).sqrt()
}

/// Obstacle-free cube in dimension `d`, start at 0.1 in every coordinate,
/// goal [0.75, 1]^d.
pub fn open_cube(d: usize) -> Scenario {
    Scenario::open(
        d,
        Point::splat(d, 0.1).expect("valid"),
        Aabb::cube(d, 0.75, 1.0).expect("valid"),
    )
    .expect("valid preset")
}

pub fn open_cube_optimum(d: usize) -> f64 {
    0.65 * (d as f64).sqrt()
}

/// A square cluttered with rectangular obstacles between the lower-left start
/// and the upper-right goal.
pub fn cluttered() -> Scenario {
    let boxes = [
        ([0.15, 0.25], [0.35, 0.35]),
        ([0.45, 0.05], [0.55, 0.4]),
        ([0.2, 0.5], [0.3, 0.85]),
        ([0.4, 0.55], [0.7, 0.65]),
        ([0.65, 0.2], [0.8, 0.3]),
        ([0.8, 0.4], [0.9, 0.7]),
        ([0.55, 0.75], [0.65, 0.95]),
        ([0.05, 0.9], [0.45, 0.95]),
    ];
    Scenario::new(
        2,
        boxes.iter().map(|(lo, hi)| aabb(lo, hi)).collect(),
        pt(&[0.05, 0.05]),
        aabb(&[0.9, 0.9], &[0.98, 0.98]),
        Vec::new(),
    )
    .expect("valid preset")
}

/// Open square where crossing the middle band is expensive (weight 2) and a
/// detour strip along the top is cheap (weight 0.5).
pub fn cost_field() -> Scenario {
    Scenario::new(
        2,
        vec![aabb(&[0.45, 0.0], &[0.55, 0.3])],
        pt(&[0.1, 0.1]),
        aabb(&[0.85, 0.05], &[0.95, 0.15]),
        vec![
            CostRegion::new(aabb(&[0.3, 0.0], &[0.7, 0.7]), 2.0).expect("valid"),
            CostRegion::new(aabb(&[0.0, 0.8], &[1.0, 1.0]), 0.5).expect("valid"),
        ],
    )
    .expect("valid preset")
}
