//! SVG 1.1 rendering of a plan: nodes, base stations and cluster hulls.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::geo::{convex_hull, DigitalMap, NodeId, Point};
use crate::planner::PlanResult;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#ad494a",
];

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;
const LEGEND_LINE: f64 = 16.0;

pub fn cluster_color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(map: &DigitalMap) -> Self {
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for n in &map.nodes {
            min_x = min_x.min(n.x_m);
            max_x = max_x.max(n.x_m);
            min_y = min_y.min(n.y_m);
            max_y = max_y.max(n.y_m);
        }
        let span = (max_x - min_x).max(max_y - min_y).max(1.0);
        let scale = (WIDTH - 2.0 * MARGIN) / span;
        let height = (max_y - min_y) * scale + 2.0 * MARGIN;
        Frame {
            min_x,
            max_y,
            scale,
            height,
        }
    }

    /// Map meters to SVG pixels, y pointing down.
    fn px(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min_x) * self.scale,
            MARGIN + (self.max_y - p.y) * self.scale,
        )
    }
}

/// Render `plan` over `map`. Output depends only on the inputs.
pub fn render_svg(plan: &PlanResult, map: &DigitalMap) -> String {
    let frame = Frame::new(map);
    let legend_h = LEGEND_LINE * (plan.clusters.len() as f64 + 1.0) + MARGIN;
    let height = frame.height + legend_h;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{height:.2}" viewBox="0 0 {WIDTH:.0} {height:.2}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let mut owner: BTreeMap<NodeId, usize> = BTreeMap::new();
    let _ = writeln!(out, r#"<g id="hulls">"#);
    for (i, cluster) in plan.clusters.iter().enumerate() {
        let color = cluster_color(i);
        let pts: Vec<Point> = cluster
            .member_ids
            .iter()
            .filter_map(|id| map.node(*id))
            .map(|n| n.point())
            .collect();
        for id in &cluster.member_ids {
            owner.insert(*id, i);
        }
        let hull = convex_hull(&pts);
        match hull.len() {
            0 | 1 => {}
            2 => {
                let (x1, y1) = frame.px(hull[0]);
                let (x2, y2) = frame.px(hull[1]);
                let _ = writeln!(
                    out,
                    r#"<line class="hull" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-width="3"/>"#
                );
            }
            _ => {
                let coords: Vec<String> = hull
                    .iter()
                    .map(|p| {
                        let (x, y) = frame.px(*p);
                        format!("{x:.2},{y:.2}")
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polygon class="hull" points="{}" fill="{color}" fill-opacity="0.25" stroke="{color}" stroke-width="1.5"/>"#,
                    coords.join(" ")
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");

    let max_load = map
        .nodes
        .iter()
        .map(|n| n.subscribers)
        .fold(0.0, f64::max)
        .max(1.0);
    let _ = writeln!(out, r#"<g id="nodes">"#);
    for n in &map.nodes {
        let (x, y) = frame.px(n.point());
        let r = 2.0 + 6.0 * (n.subscribers / max_load).sqrt();
        let color = owner.get(&n.id).map_or("#000000", |&i| cluster_color(i));
        let _ = writeln!(
            out,
            r#"<circle class="node" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{color}"/>"#
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g id="medoids">"#);
    for (i, cluster) in plan.clusters.iter().enumerate() {
        let (x, y) = frame.px(Point::new(cluster.medoid_x_m, cluster.medoid_y_m));
        let _ = writeln!(
            out,
            r#"<rect class="medoid" x="{:.2}" y="{:.2}" width="10" height="10" fill="{}" stroke="black" stroke-width="1.5"/>"#,
            x - 5.0,
            y - 5.0,
            cluster_color(i)
        );
    }
    let _ = writeln!(out, "</g>");

    let top = frame.height + MARGIN;
    let _ = writeln!(
        out,
        r#"<g id="legend" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{top:.2}">{} k={} {} feasible={}</text>"#,
        escape(&plan.map_name),
        plan.final_k,
        plan.method.label(),
        plan.feasible
    );
    for (i, c) in plan.clusters.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN}" y="{:.2}" fill="{}">BS {} coverage={:.3} capacity={:.3}</text>"#,
            top + LEGEND_LINE * (i as f64 + 1.0),
            cluster_color(i),
            c.medoid_id,
            c.cells_coverage_ratio,
            c.cells_capacity_ratio
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
