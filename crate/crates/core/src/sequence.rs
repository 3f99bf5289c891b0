//! Dense full-state motion sequences along topological paths: per-point kernel
//! checks over a limited orientation range, recursive segment repair, risk
//! labelling and extraction of SE(2) / R² sub-problems.

use crate::geometry::{discretize_segment, Pose2, Vec2};
use crate::gridmap::OccupancyGrid;
use crate::shape::{BodyEsdf, RobotKernel, RobotShape};
use crate::topo::{push_away, PushParams, Se2Path};

type Point = Vec2<f64>;
type Grid = OccupancyGrid<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Risk {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    pub position: Point,
    /// Kernel orientation index. For high-risk states this is the preferred
    /// (tangent) index, since no free orientation exists.
    pub orientation: usize,
    pub risk: Risk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    pub states: Vec<MotionState>,
    pub path_id: usize,
}

impl MotionSequence {
    pub fn high_risk_count(&self) -> usize {
        self.states.iter().filter(|s| s.risk == Risk::High).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubKind {
    Se2,
    R2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubProblem {
    pub kind: SubKind,
    pub states: Vec<MotionState>,
    /// Index of `states[0]` in the source sequence.
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceParams {
    /// Orientation indices tried on each side of the preferred one.
    pub search_range: usize,
    pub max_depth: usize,
    /// Low-risk states added on each side of a high-risk run.
    pub pad: usize,
    pub push: PushParams,
}

impl SequenceParams {
    pub fn for_resolution(resolution: f64, kernel: &RobotKernel) -> Self {
        Self {
            search_range: 4.min(kernel.n_orientations() / 2),
            max_depth: 4,
            pad: 5,
            push: PushParams {
                margin: resolution,
                max_attempts: 20,
                yaw_step: kernel.angular_step() / 4.0,
            },
        }
    }
}

/// Collision-free orientation indices at `p`, tested in the order
/// `k, k+1, k-1, k+2, k-2, ...` up to `search_range` steps away.
pub fn safe_yaw(p: Point, preferred: usize, kernel: &RobotKernel, grid: &Grid, search_range: usize) -> Vec<usize> {
    let n = kernel.n_orientations();
    assert!(search_range <= n / 2, "search range exceeds half the orientations");
    let k = preferred % n;
    let mut order = vec![k];
    for r in 1..=search_range {
        for cand in [(k + r) % n, (k + n - r) % n] {
            if !order.contains(&cand) {
                order.push(cand);
            }
        }
    }
    order.into_iter().filter(|&c| !kernel.collides(grid, p, c)).collect()
}

fn heading(a: Point, b: Point) -> f64 {
    let d = b - a;
    d.y.atan2(d.x)
}

/// Shared inputs for the repair recursion.
pub struct SequenceContext<'a> {
    pub shape: &'a RobotShape<f64>,
    pub esdf: &'a BodyEsdf<f64>,
    pub kernel: &'a RobotKernel,
    pub grid: &'a Grid,
    pub params: SequenceParams,
}

impl SequenceContext<'_> {
    fn preferred(&self, a: Point, b: Point) -> usize {
        self.kernel.nearest_index(heading(a, b))
    }

    fn is_free(&self, p: Point, preferred: usize) -> bool {
        !safe_yaw(p, preferred, self.kernel, self.grid, self.params.search_range).is_empty()
    }

    fn first_blocked(&self, a: Point, b: Point) -> Option<Point> {
        let k = self.preferred(a, b);
        discretize_segment(a, b, self.grid.resolution())
            .into_iter()
            .find(|&p| !self.is_free(p, k))
    }

    /// Recursive repair of `a -> b` starting from the blocked point `at`.
    /// Returns the polyline vertices, endpoints included.
    fn repair(&self, a: Point, b: Point, at: Point, depth: usize) -> Option<Vec<Point>> {
        if depth >= self.params.max_depth {
            return None;
        }
        let pose = Pose2 {
            position: at,
            yaw: heading(a, b),
        };
        let pushed = push_away(self.shape, self.esdf, pose, self.grid, &self.params.push).pose.position;
        let eps = 1e-9;
        if pushed.distance(a) < eps || pushed.distance(b) < eps || !self.grid.contains_point(pushed) {
            return None;
        }
        if !self.is_free(pushed, self.kernel.nearest_index(heading(a, b))) {
            return None;
        }
        let mut left = self.adjust(a, pushed, depth + 1)?;
        let right = self.adjust(pushed, b, depth + 1)?;
        left.pop();
        left.extend(right);
        Some(left)
    }

    fn adjust(&self, a: Point, b: Point, depth: usize) -> Option<Vec<Point>> {
        match self.first_blocked(a, b) {
            None => Some(vec![a, b]),
            Some(p) => self.repair(a, b, p, depth),
        }
    }
}

/// Repairs segment `a -> b` whose discretization hits a point with no free
/// orientation: the first such point is pushed away from obstacles, the segment
/// is split there and both children are repaired recursively. At most
/// `max_depth` levels are used (depth 1 is the original segment). Returns the
/// polyline vertices (endpoints included) on success.
pub fn seg_adjust(a: Point, b: Point, ctx: &SequenceContext<'_>) -> Option<Vec<Point>> {
    ctx.adjust(a, b, 1)
}

/// Like [`seg_adjust`] but the first push starts from the given blocked point.
pub fn seg_adjust_at(a: Point, b: Point, at: Point, ctx: &SequenceContext<'_>) -> Option<Vec<Point>> {
    ctx.repair(a, b, at, 1)
}

fn low_state(p: Point, preferred: usize, ctx: &SequenceContext<'_>) -> Option<MotionState> {
    safe_yaw(p, preferred, ctx.kernel, ctx.grid, ctx.params.search_range)
        .first()
        .map(|&k| MotionState {
            position: p,
            orientation: k,
            risk: Risk::Low,
        })
}

/// Converts a topological path into a dense sequence of states spaced at most
/// one grid cell apart.
pub fn generate_sequence(path: &Se2Path, path_id: usize, ctx: &SequenceContext<'_>) -> MotionSequence {
    let res = ctx.grid.resolution();
    let pts = path.positions();
    let mut states: Vec<MotionState> = Vec::new();
    if pts.len() == 1 {
        let k = ctx.kernel.nearest_index(path.waypoints[0].yaw);
        let st = low_state(pts[0], k, ctx).unwrap_or(MotionState {
            position: pts[0],
            orientation: k,
            risk: Risk::High,
        });
        states.push(st);
    }
    for (seg, w) in pts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if a.distance(b) < 1e-12 {
            continue;
        }
        let preferred = ctx.preferred(a, b);
        let skip = usize::from(seg > 0 && !states.is_empty());
        let mut buffer = Vec::new();
        for p in discretize_segment(a, b, res).into_iter().skip(skip) {
            if let Some(st) = low_state(p, preferred, ctx) {
                buffer.push(st);
                continue;
            }
            if let Some(poly) = seg_adjust_at(a, b, p, ctx) {
                buffer.clear();
                for (j, sub) in poly.windows(2).enumerate() {
                    let k = ctx.preferred(sub[0], sub[1]);
                    let first = usize::from(j > 0 || skip == 1);
                    for q in discretize_segment(sub[0], sub[1], res).into_iter().skip(first) {
                        buffer.push(low_state(q, k, ctx).expect("repaired polyline point lost its free orientation"));
                    }
                }
                break;
            }
            buffer.push(MotionState {
                position: p,
                orientation: preferred,
                risk: Risk::High,
            });
        }
        states.extend(buffer);
    }
    if states.is_empty() {
        // Degenerate path where all waypoints coincide.
        let k = ctx.kernel.nearest_index(path.waypoints[0].yaw);
        states.push(low_state(pts[0], k, ctx).unwrap_or(MotionState {
            position: pts[0],
            orientation: k,
            risk: Risk::High,
        }));
    }
    MotionSequence { states, path_id }
}

/// Splits a sequence into alternating R² and SE(2) sub-problems. High-risk runs
/// dilated by `pad` states become SE(2) problems; neighbouring problems share
/// their junction state. A pad below one is raised to one so that R² problems
/// never include a high-risk junction.
pub fn extract_subproblems(seq: &MotionSequence, pad: usize) -> Vec<SubProblem> {
    let pad = pad.max(1);
    let n = seq.states.len();
    assert!(n > 0, "empty sequence");
    let mut se2 = vec![false; n];
    for (i, s) in seq.states.iter().enumerate() {
        if s.risk == Risk::High {
            let lo = i.saturating_sub(pad);
            let hi = (i + pad).min(n - 1);
            se2[lo..=hi].iter_mut().for_each(|m| *m = true);
        }
    }
    let mut runs: Vec<(bool, usize, usize)> = Vec::new();
    for (i, &m) in se2.iter().enumerate() {
        match runs.last_mut() {
            Some((kind, _, end)) if *kind == m => *end = i,
            _ => runs.push((m, i, i)),
        }
    }
    let mut out = Vec::with_capacity(runs.len());
    for (r, &(is_se2, s, e)) in runs.iter().enumerate() {
        let (lo, hi) = if is_se2 {
            (s, e)
        } else {
            let lo = if r > 0 { s - 1 } else { s };
            let hi = if r + 1 < runs.len() { e + 1 } else { e };
            (lo, hi)
        };
        out.push(SubProblem {
            kind: if is_se2 { SubKind::Se2 } else { SubKind::R2 },
            states: seq.states[lo..=hi].to_vec(),
            offset: lo,
        });
    }
    out
}
