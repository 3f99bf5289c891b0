//! SVG renderings of maps, candidate paths, motion sequences, trajectories and
//! swept outlines. World `y` points up; the SVG is flipped accordingly.

use std::fmt::Write;

use svplan::pipeline::{CandidatePlan, SegmentKind};
use svplan::sequence::{MotionSequence, Risk};
use svplan::sweep::swept_boundary_samples;
use svplan::topo::Se2Path;
use svplan::{Grid, Point, Pose, Shape, Traj};

const CANDIDATE_COLORS: [&str; 6] = ["#1f77b4", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22"];

/// Samples per trajectory piece in path elements.
const PIECE_SAMPLES: usize = 24;

pub fn kind_color(kind: SegmentKind) -> &'static str {
    match kind {
        SegmentKind::Se2 => "#2ca02c",
        SegmentKind::R2 => "#ff7f0e",
        SegmentKind::R2Reoptimized => "#1f77b4",
    }
}

struct Svg {
    body: String,
    height: f64,
    x0: f64,
}

impl Svg {
    fn new(grid: &Grid) -> Self {
        let b = grid.bounds();
        let (w, h) = (b.max.x - b.min.x, b.max.y - b.min.y);
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.4} {h:.4}" width="{:.0}" height="{:.0}">"#,
            w * 200.0,
            h * 200.0
        );
        let _ = writeln!(body, r#"<rect x="0" y="0" width="{w:.4}" height="{h:.4}" fill="white"/>"#);
        let mut svg = Self {
            body,
            height: b.max.y,
            x0: b.min.x,
        };
        svg.obstacles(grid);
        svg
    }

    fn x(&self, x: f64) -> f64 {
        x - self.x0
    }

    fn y(&self, y: f64) -> f64 {
        self.height - y
    }

    fn obstacles(&mut self, grid: &Grid) {
        let res = grid.resolution();
        let o = grid.origin();
        self.body.push_str("<g class=\"obstacles\" fill=\"#404040\">\n");
        for iy in 0..grid.height() {
            let mut ix = 0;
            while ix < grid.width() {
                if !grid.is_occupied(ix, iy) {
                    ix += 1;
                    continue;
                }
                let start = ix;
                while ix < grid.width() && grid.is_occupied(ix, iy) {
                    ix += 1;
                }
                let x = self.x(o.x + start as f64 * res);
                let y = self.y(o.y + (iy + 1) as f64 * res);
                let _ = writeln!(
                    self.body,
                    r#"<rect x="{x:.4}" y="{y:.4}" width="{:.4}" height="{res:.4}"/>"#,
                    (ix - start) as f64 * res
                );
            }
        }
        self.body.push_str("</g>\n");
    }

    fn points_attr(&self, pts: &[Point]) -> String {
        pts.iter().map(|p| format!("{:.4},{:.4}", self.x(p.x), self.y(p.y))).collect::<Vec<_>>().join(" ")
    }

    fn polyline(&mut self, pts: &[Point], color: &str, width: f64, class: &str) {
        let attr = self.points_attr(pts);
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" points="{attr}" fill="none" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    fn polygon(&mut self, pts: &[Point], stroke: &str, fill: &str, opacity: f64, class: &str) {
        let attr = self.points_attr(pts);
        let _ = writeln!(
            self.body,
            r#"<polygon class="{class}" points="{attr}" fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}" stroke-width="0.008"/>"#
        );
    }

    fn circle(&mut self, p: Point, r: f64, fill: &str, class: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{:.4}" cy="{:.4}" r="{r}" fill="{fill}"/>"#,
            self.x(p.x),
            self.y(p.y)
        );
    }

    fn endpoints(&mut self, shape: &Shape, start: &Pose, goal: &Pose) {
        self.polygon(&shape.outline(start), "#000000", "#7fbf7f", 1.0, "start");
        self.polygon(&shape.outline(goal), "#000000", "#bf7f7f", 1.0, "goal");
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Map with every topological candidate path overlaid.
pub fn candidates_svg(grid: &Grid, shape: &Shape, start: &Pose, goal: &Pose, paths: &[Se2Path]) -> String {
    let mut svg = Svg::new(grid);
    for (i, p) in paths.iter().enumerate() {
        svg.polyline(&p.positions(), CANDIDATE_COLORS[i % CANDIDATE_COLORS.len()], 0.02, "candidate");
    }
    svg.endpoints(shape, start, goal);
    svg.finish()
}

/// Motion states of one candidate colored by risk; high-risk states also show
/// the robot outline at the chosen kernel orientation.
pub fn sequence_svg(grid: &Grid, shape: &Shape, seq: &MotionSequence, yaw_of: impl Fn(usize) -> f64) -> String {
    let mut svg = Svg::new(grid);
    let r = grid.resolution() * 0.3;
    for s in &seq.states {
        match s.risk {
            Risk::Low => svg.circle(s.position, r, "#2ca02c", "low-risk"),
            Risk::High => {
                let pose = Pose {
                    position: s.position,
                    yaw: yaw_of(s.orientation),
                };
                svg.polygon(&shape.outline(&pose), "#d62728", "none", 0.0, "high-risk-outline");
                svg.circle(s.position, r, "#d62728", "high-risk");
            }
        }
    }
    svg.finish()
}

fn piece_path(svg: &Svg, traj: &Traj, piece: usize) -> String {
    let t = traj.durations()[piece];
    let mut d = String::new();
    for k in 0..=PIECE_SAMPLES {
        let p = traj.piece_eval(piece, t * k as f64 / PIECE_SAMPLES as f64, 0);
        let cmd = if k == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{:.4} {:.4} ", svg.x(p[0]), svg.y(p[1]));
    }
    d.trim_end().to_string()
}

/// Final trajectory: exactly one path element per piece, colored by the
/// optimizer that produced it.
pub fn trajectory_svg(grid: &Grid, shape: &Shape, start: &Pose, goal: &Pose, plan: &CandidatePlan) -> String {
    let mut svg = Svg::new(grid);
    svg.endpoints(shape, start, goal);
    for seg in &plan.segments {
        for piece in seg.pieces.clone() {
            let d = piece_path(&svg, &plan.trajectory, piece);
            let _ = writeln!(
                svg.body,
                r#"<path class="piece {kind}" data-piece="{piece}" d="{d}" fill="none" stroke="{color}" stroke-width="0.025"/>"#,
                kind = seg.kind.as_str(),
                color = kind_color(seg.kind)
            );
        }
    }
    svg.finish()
}

/// Robot outlines along the trajectory.
pub fn swept_svg(grid: &Grid, shape: &Shape, traj: &Traj, samples: usize) -> String {
    let mut svg = Svg::new(grid);
    for outline in swept_boundary_samples(traj, shape, samples.max(2)) {
        svg.polygon(&outline, "#1f77b4", "#1f77b4", 0.08, "swept");
    }
    let pts: Vec<Point> = (0..=samples.max(2) * 4)
        .map(|k| {
            let t = traj.total_duration() * k as f64 / (samples.max(2) * 4) as f64;
            let p = traj.eval(t, 0).expect("time inside trajectory");
            Point::new(p[0], p[1])
        })
        .collect();
    svg.polyline(&pts, "#000000", 0.01, "reference");
    svg.finish()
}
