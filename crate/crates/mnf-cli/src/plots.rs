//! Self-contained SVG emission: a trajectory overlay of the workspace and a
//! potential-versus-step chart. Presentation only; no numeric artifact
//! depends on these files.

use mnf::{Scenario, SimResult, Vec2};
use std::fmt::Write;

const W: f64 = 900.0;
const MARGIN: f64 = 40.0;

fn color(i: usize, n: usize) -> String {
    let hue = 360.0 * i as f64 / n.max(1) as f64;
    format!("hsl({hue:.0},70%,40%)")
}

/// Workspace overlay: obstacles, start markers, targets, and one polyline
/// per agent.
pub fn trajectories_svg(scenario: &Scenario, result: &SimResult) -> String {
    let ws = scenario.workspace;
    let scale = (W - 2.0 * MARGIN) / ws.width;
    let h = ws.height * scale + 2.0 * MARGIN;
    let px = |p: Vec2| (MARGIN + p.x * scale, h - MARGIN - p.y * scale);

    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{h:.0}\" viewBox=\"0 0 {W} {h:.0}\">\n"
    );
    let (x0, y0) = px(Vec2::new(0.0, ws.height));
    let _ = write!(
        s,
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"white\" stroke=\"black\"/>\n",
        ws.width * scale,
        ws.height * scale
    );
    for o in &scenario.obstacles {
        let (cx, cy) = px(o.center);
        let r = (o.radius * scale).max(2.0);
        let _ = write!(
            s,
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"#666\" fill-opacity=\"0.7\"/>\n"
        );
    }
    let n = result.trajectories.len();
    for (i, traj) in result.trajectories.iter().enumerate() {
        let col = color(i, n);
        let mut points = String::new();
        for sample in &traj.samples {
            let (x, y) = px(sample.position);
            let _ = write!(points, "{x:.2},{y:.2} ");
        }
        let _ = write!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{col}\" stroke-width=\"1.2\"/>\n",
            points.trim_end()
        );
        if let Some(first) = traj.samples.first() {
            let (x, y) = px(first.position);
            let _ = write!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{col}\"/>\n");
        }
    }
    for (i, agent) in scenario.agents.iter().enumerate() {
        let col = color(i, n);
        let (x, y) = px(agent.qt);
        let _ = write!(
            s,
            "<path d=\"M {x0} {y0} L {x1} {y1} M {x0} {y1} L {x1} {y0}\" stroke=\"{col}\" stroke-width=\"1.5\"/>\n",
            x0 = x - 4.0,
            x1 = x + 4.0,
            y0 = y - 4.0,
            y1 = y + 4.0,
            col = col
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Potential value of every agent against the simulation step.
pub fn potentials_svg(result: &SimResult) -> String {
    let h = 500.0;
    let max_step = result
        .trajectories
        .iter()
        .filter_map(|t| t.samples.last().map(|s| s.step))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let max_pot = result
        .trajectories
        .iter()
        .flat_map(|t| t.samples.iter().map(|s| s.potential))
        .fold(0.0f64, f64::max)
        .max(1e-12);

    let px = |step: usize, pot: f64| {
        (
            MARGIN + (W - 2.0 * MARGIN) * step as f64 / max_step,
            h - MARGIN - (h - 2.0 * MARGIN) * pot / max_pot,
        )
    };

    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{h}\" viewBox=\"0 0 {W} {h}\">\n"
    );
    let _ = write!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{y}\" x2=\"{x}\" y2=\"{y}\" stroke=\"black\"/>\n",
        y = h - MARGIN,
        x = W - MARGIN
    );
    let _ = write!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{y}\" stroke=\"black\"/>\n",
        y = h - MARGIN
    );
    let _ = write!(
        s,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"12\">step (max {max_step})</text>\n",
        x = W / 2.0 - 40.0,
        y = h - 10.0
    );
    let _ = write!(
        s,
        "<text x=\"6\" y=\"{y}\" font-size=\"12\" transform=\"rotate(-90 12 {y})\">potential (max {max_pot:.3})</text>\n",
        y = h / 2.0
    );
    let n = result.trajectories.len();
    for (i, traj) in result.trajectories.iter().enumerate() {
        let col = color(i, n);
        let mut points = String::new();
        for sample in &traj.samples {
            let (x, y) = px(sample.step, sample.potential);
            let _ = write!(points, "{x:.2},{y:.2} ");
        }
        let _ = write!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{col}\" stroke-width=\"1\"/>\n",
            points.trim_end()
        );
    }
    s.push_str("</svg>\n");
    s
}
