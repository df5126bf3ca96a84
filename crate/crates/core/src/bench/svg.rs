//! SVG snapshots of planar roadmaps and trees.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{PathPolyline, Scenario};
use crate::graph::RoadmapGraph;

const SIZE: f64 = 600.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("only planar scenarios can be rendered, got dimension {0}")]
    NotPlanar(usize),
}

fn sx(x: f64) -> f64 {
    x * SIZE
}

fn sy(y: f64) -> f64 {
    (1.0 - y) * SIZE
}

fn rect(out: &mut String, lo: &[f64], hi: &[f64], style: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" {style}/>"#,
        sx(lo[0]),
        sy(hi[1]),
        sx(hi[0]) - sx(lo[0]),
        sy(lo[1]) - sy(hi[1]),
    );
}

/// Draws obstacles (grey), cost regions (tinted by weight), the goal (green),
/// every edge, every vertex, and `highlight` as a red polyline.
pub fn render_svg(
    g: &RoadmapGraph,
    scenario: &Scenario,
    highlight: Option<&PathPolyline>,
) -> Result<String, RenderError> {
    if scenario.dim() != 2 {
        return Err(RenderError::NotPlanar(scenario.dim()));
    }
    if g.vertex_count() > 0 && g.dim() != 2 {
        return Err(RenderError::NotPlanar(g.dim()));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white" stroke="black"/>"#
    );

    for c in scenario.cost_regions() {
        let fill = if c.weight > 1.0 { "#f4c27a" } else { "#a9d4f5" };
        rect(
            &mut out,
            c.region.lo().coords(),
            c.region.hi().coords(),
            &format!(r#"fill="{fill}" fill-opacity="0.5" class="cost-region""#),
        );
    }
    for o in scenario.obstacles() {
        rect(
            &mut out,
            o.lo().coords(),
            o.hi().coords(),
            r##"fill="#7f7f7f" class="obstacle""##,
        );
    }
    let goal = scenario.goal();
    rect(
        &mut out,
        goal.lo().coords(),
        goal.hi().coords(),
        r##"fill="#6cc36c" fill-opacity="0.7" class="goal""##,
    );

    let _ = writeln!(out, r##"<g stroke="#3060c0" stroke-width="0.6" class="edges">"##);
    let edges: Vec<(usize, usize)> = if g.is_tree() {
        g.edges().map(|(u, v, _)| (u, v)).collect()
    } else {
        g.undirected_edges()
    };
    for (u, v) in edges {
        let (a, b) = (g.point(u), g.point(v));
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            sx(a[0]),
            sy(a[1]),
            sx(b[0]),
            sy(b[1])
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g fill="black" class="vertices">"#);
    for p in g.vertices() {
        let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="1.2"/>"#, sx(p[0]), sy(p[1]));
    }
    let _ = writeln!(out, "</g>");

    if let Some(path) = highlight {
        let pts: Vec<String> = path
            .waypoints()
            .iter()
            .map(|p| format!("{:.3},{:.3}", sx(p[0]), sy(p[1])))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2.5" class="best-path"/>"#,
            pts.join(" ")
        );
    }
    let x = scenario.x_init();
    let _ = writeln!(
        out,
        r#"<rect x="{:.3}" y="{:.3}" width="8" height="8" fill="orange" class="start"/>"#,
        sx(x[0]) - 4.0,
        sy(x[1]) - 4.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}
