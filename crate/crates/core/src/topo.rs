//! Topological front end: visibility roadmap on the inflated map, depth-first
//! path extraction, geometry-aware path shortcutting and deduplication by
//! uniform visibility deformation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{discretize_polyline, polyline_length, resample_polyline, Pose2, Vec2};
use crate::gridmap::{OccupancyGrid, Visibility};
use crate::scalar::Scalar;
use crate::shape::{BodyEsdf, RobotKernel, RobotShape};

type Point = Vec2<f64>;
type Grid = OccupancyGrid<f64>;
type Pose = Pose2<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum TopoError {
    #[error("{which} position is blocked in the inflated map")]
    InfeasibleEndpoint { which: &'static str },
    #[error("point ({x}, {y}) lies outside the map")]
    OutOfBounds { x: f64, y: f64 },
    #[error("paths do not share start and goal")]
    MismatchedEndpoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Start,
    Goal,
    Pushed,
    Passthrough,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se2Waypoint {
    pub position: Point,
    /// Radians in (-π, π].
    pub yaw: f64,
    pub provenance: Provenance,
    /// False for pushed waypoints that never cleared the margin.
    pub safe: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Se2Path {
    pub waypoints: Vec<Se2Waypoint>,
}

impl Se2Path {
    pub fn positions(&self) -> Vec<Point> {
        self.waypoints.iter().map(|w| w.position).collect()
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.positions())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Start,
    Goal,
    Guard,
    Connector,
}

/// Visibility graph; node 0 is the start and node 1 the goal.
#[derive(Debug, Clone, PartialEq)]
pub struct Roadmap {
    pub nodes: Vec<Point>,
    pub kinds: Vec<NodeKind>,
    adjacency: Vec<Vec<usize>>,
}

impl Roadmap {
    pub const START: usize = 0;
    pub const GOAL: usize = 1;

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn connect(&mut self, a: usize, b: usize) {
        if a != b && !self.has_edge(a, b) {
            self.adjacency[a].push(b);
            self.adjacency[b].push(a);
        }
    }

    fn add(&mut self, p: Point, kind: NodeKind) -> usize {
        self.nodes.push(p);
        self.kinds.push(kind);
        self.adjacency.push(Vec::new());
        self.nodes.len() - 1
    }

    /// Whether `a` and `b` are in the same connected component.
    pub fn connected(&self, a: usize, b: usize) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![a];
        seen[a] = true;
        while let Some(v) = stack.pop() {
            if v == b {
                return true;
            }
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadmapParams {
    /// Uniform free-space samples.
    pub samples: usize,
    pub seed: u64,
    /// Free runs of at most this many cells, walled on both sides, are seeded
    /// before uniform sampling; 0 disables seeding.
    pub narrow_run: usize,
}

impl Default for RoadmapParams {
    fn default() -> Self {
        Self {
            samples: 500,
            seed: 0,
            narrow_run: 5,
        }
    }
}

/// Mid cells of short free runs bounded by occupied cells along rows and
/// columns, in scan order.
pub fn narrow_passage_seeds(grid: &Grid, max_run: usize) -> Vec<Point> {
    let mut seeds = Vec::new();
    if max_run == 0 {
        return seeds;
    }
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let mut scan = |len: i64, lines: i64, cell: &dyn Fn(i64, i64) -> (i64, i64)| {
        for line in 0..lines {
            let mut k = 0;
            while k < len {
                let (x, y) = cell(line, k);
                if grid.is_occupied(x as usize, y as usize) {
                    k += 1;
                    continue;
                }
                let begin = k;
                while k < len {
                    let (x, y) = cell(line, k);
                    if grid.is_occupied(x as usize, y as usize) {
                        break;
                    }
                    k += 1;
                }
                let run = (k - begin) as usize;
                if begin > 0 && k < len && run <= max_run {
                    let (x, y) = cell(line, begin + (k - 1 - begin) / 2);
                    seeds.push(grid.cell_center(x, y));
                }
            }
        }
    };
    scan(w, h, &|row, col| (col, row));
    scan(h, w, &|col, row| (col, row));
    seeds
}

/// Guard/connector visibility roadmap. Guards are samples not seen by any
/// existing guard; a sample seeing exactly two guards becomes a connector
/// between them unless an equivalent (deformable) connector already exists,
/// in which case the shorter of the two is kept. Start and goal are guards
/// and are joined directly when mutually visible.
pub fn build_roadmap(inflated: &Grid, start: Point, goal: Point, params: &RoadmapParams) -> Result<Roadmap, TopoError> {
    for (which, p) in [("start", start), ("goal", goal)] {
        if !inflated.contains_point(p) || inflated.is_occupied_at(p) {
            return Err(TopoError::InfeasibleEndpoint { which });
        }
    }
    let mut map = Roadmap {
        nodes: Vec::new(),
        kinds: Vec::new(),
        adjacency: Vec::new(),
    };
    map.add(start, NodeKind::Start);
    map.add(goal, NodeKind::Goal);
    if inflated.is_visible(start, goal) {
        map.connect(Roadmap::START, Roadmap::GOAL);
    }
    let mut guards = vec![Roadmap::START, Roadmap::GOAL];

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let bounds = inflated.bounds();
    let seeds = narrow_passage_seeds(inflated, params.narrow_run);
    let uniform = (0..params.samples).filter_map(|_| {
        let p = Point::new(
            rng.gen_range(bounds.min.x..bounds.max.x),
            rng.gen_range(bounds.min.y..bounds.max.y),
        );
        (!inflated.is_occupied_at(p)).then_some(p)
    });
    let samples: Vec<Point> = seeds.into_iter().chain(uniform).collect();

    for p in samples {
        let mut seen = guards.iter().copied().filter(|&g| inflated.is_visible(p, map.nodes[g]));
        let first = seen.next();
        let second = seen.next();
        let third = seen.next();
        match (first, second, third) {
            (None, _, _) => {
                let g = map.add(p, NodeKind::Guard);
                guards.push(g);
            }
            (Some(g1), Some(g2), None) => add_connector(&mut map, inflated, p, g1, g2),
            _ => {}
        }
    }
    Ok(map)
}

fn add_connector(map: &mut Roadmap, grid: &Grid, p: Point, g1: usize, g2: usize) {
    let (a, b) = (map.nodes[g1], map.nodes[g2]);
    let existing: Vec<usize> = map.adjacency[g1]
        .iter()
        .copied()
        .filter(|&c| map.kinds[c] == NodeKind::Connector && map.has_edge(c, g2))
        .collect();
    let new_len = a.distance(p) + p.distance(b);
    for c in existing {
        let cp = map.nodes[c];
        if uvd_equivalent_unchecked(&[a, p, b], &[a, cp, b], grid) {
            if new_len < a.distance(cp) + cp.distance(b) {
                map.nodes[c] = p;
            }
            return;
        }
    }
    let c = map.add(p, NodeKind::Connector);
    map.connect(c, g1);
    map.connect(c, g2);
}

/// Depth-first enumeration of simple start→goal paths with at most
/// `max_vertices` vertices, stopping after `max_paths` paths or after a fixed
/// expansion budget.
pub fn extract_paths(map: &Roadmap, max_paths: usize, max_vertices: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let mut on_path = vec![false; map.nodes.len()];
    let mut stack = vec![Roadmap::START];
    on_path[Roadmap::START] = true;
    let mut budget = 200_000usize;
    dfs(map, &mut stack, &mut on_path, &mut out, max_paths, max_vertices, &mut budget);
    out
}

fn dfs(
    map: &Roadmap,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<Point>>,
    max_paths: usize,
    max_vertices: usize,
    budget: &mut usize,
) {
    let v = *stack.last().unwrap();
    if v == Roadmap::GOAL {
        out.push(stack.iter().map(|&i| map.nodes[i]).collect());
        return;
    }
    if stack.len() >= max_vertices {
        return;
    }
    for &w in map.neighbors(v) {
        if out.len() >= max_paths || *budget == 0 {
            return;
        }
        if on_path[w] {
            continue;
        }
        *budget -= 1;
        on_path[w] = true;
        stack.push(w);
        dfs(map, stack, on_path, out, max_paths, max_vertices, budget);
        stack.pop();
        on_path[w] = false;
    }
}

/// Cubic blend along the shortest arc with zero end rates.
pub fn orientation_interp(theta_a: f64, theta_b: f64, s: f64) -> f64 {
    let delta = (theta_b - theta_a).wrap_angle();
    let s = s.clamp(0.0, 1.0);
    (theta_a + delta * (3.0 * s * s - 2.0 * s * s * s)).wrap_angle()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushParams {
    /// Required clearance between obstacle points and the robot boundary.
    pub margin: f64,
    pub max_attempts: usize,
    /// Trial yaw change per attempt (radians); 0 disables yaw adjustment.
    pub yaw_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushOutcome {
    pub pose: Pose,
    pub safe: bool,
    pub attempts: usize,
}

fn min_clearance(shape: &RobotShape<f64>, pose: &Pose, points: &[Point]) -> f64 {
    points.iter().map(|&x| shape.world_sdf(x, pose)).fold(f64::INFINITY, f64::min)
}

/// Moves the robot away from nearby obstacles using the body-frame distance
/// field until every obstacle point clears `margin` or the attempts run out.
///
/// Each attempt translates by `-Σ (margin - sdf) ∇sdf` over the points closer
/// than the margin (capped at one map cell) and then keeps the better of the
/// current yaw and two trial yaws `±yaw_step`. Safety is decided with the exact
/// polygon distance.
pub fn push_away(shape: &RobotShape<f64>, esdf: &BodyEsdf<f64>, pose: Pose, grid: &Grid, params: &PushParams) -> PushOutcome {
    let res = grid.resolution();
    let half_extent = shape.circumradius() + params.margin + res;
    let mut pose = pose;
    let mut attempts = 0;
    loop {
        let obstacles = grid.extract_obstacles(pose.position, half_extent).points;
        let clearance = min_clearance(shape, &pose, &obstacles);
        if clearance >= params.margin {
            return PushOutcome { pose, safe: true, attempts };
        }
        if attempts >= params.max_attempts {
            return PushOutcome { pose, safe: false, attempts };
        }
        attempts += 1;
        let mut push = Point::zero();
        for &x in &obstacles {
            if let Ok((v, g)) = esdf.sdf_gradient_world(x, &pose) {
                if v < params.margin {
                    push -= g * (params.margin - v);
                }
            }
        }
        let n = push.norm();
        if n > res {
            push = push * (res / n);
        }
        let moved = Pose2 {
            position: pose.position + push,
            yaw: pose.yaw,
        };
        let near = grid.extract_obstacles(moved.position, half_extent).points;
        let mut best = (min_clearance(shape, &moved, &near), moved);
        if params.yaw_step > 0.0 {
            for dy in [params.yaw_step, -params.yaw_step] {
                let trial = Pose2 {
                    position: moved.position,
                    yaw: (moved.yaw + dy).wrap_angle(),
                };
                let c = min_clearance(shape, &trial, &near);
                if c > best.0 {
                    best = (c, trial);
                }
            }
        }
        pose = best.1;
    }
}

fn mutually_visible(grid: &Grid, a: Point, b: Point) -> bool {
    grid.first_blocked_leaving(a, b).is_visible() && grid.first_blocked_leaving(b, a).is_visible()
}

fn uvd_equivalent_unchecked(a: &[Point], b: &[Point], grid: &Grid) -> bool {
    let len = polyline_length(a).max(polyline_length(b));
    let n = ((len / grid.resolution()).ceil() as usize).max(1);
    let sa = resample_polyline(a, n + 1);
    let sb = resample_polyline(b, n + 1);
    sa.iter().zip(&sb).all(|(&p, &q)| mutually_visible(grid, p, q))
}

/// Uniform visibility deformation: both paths are resampled at equal arc
/// fractions and every matching pair must see each other.
pub fn uvd_equivalent(a: &[Point], b: &[Point], grid: &Grid) -> Result<bool, TopoError> {
    let tol = 1e-9;
    let (Some(a0), Some(a1), Some(b0), Some(b1)) = (a.first(), a.last(), b.first(), b.last()) else {
        return Err(TopoError::MismatchedEndpoints);
    };
    if a0.distance(*b0) > tol || a1.distance(*b1) > tol {
        return Err(TopoError::MismatchedEndpoints);
    }
    for p in a.iter().chain(b) {
        if !grid.contains_point(*p) {
            return Err(TopoError::OutOfBounds { x: p.x, y: p.y });
        }
    }
    Ok(uvd_equivalent_unchecked(a, b, grid))
}

/// Keeps one representative per equivalence class, preferring shorter paths
/// (ties by input order).
pub fn dedup_paths(paths: Vec<Vec<Point>>, grid: &Grid) -> Vec<Vec<Point>> {
    dedup_by(paths, grid, |p| p.clone())
}

/// [`dedup_paths`] for SE(2) paths, comparing waypoint positions.
pub fn dedup_se2_paths(paths: Vec<Se2Path>, grid: &Grid) -> Vec<Se2Path> {
    dedup_by(paths, grid, Se2Path::positions)
}

fn dedup_by<P>(paths: Vec<P>, grid: &Grid, points: impl Fn(&P) -> Vec<Point>) -> Vec<P> {
    let mut order: Vec<(f64, usize, Vec<Point>)> = paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let pts = points(p);
            (polyline_length(&pts), i, pts)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut kept: Vec<(usize, Vec<Point>)> = Vec::new();
    for (_, i, pts) in order {
        if kept.iter().all(|(_, k)| !uvd_equivalent_unchecked(&pts, k, grid)) {
            kept.push((i, pts));
        }
    }
    let mut slots: Vec<Option<P>> = paths.into_iter().map(Some).collect();
    kept.into_iter().map(|(i, _)| slots[i].take().unwrap()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortcutParams {
    pub push: PushParams,
    pub start_yaw: f64,
    pub goal_yaw: f64,
}

/// Geometry-aware shortcut of a point path.
///
/// The path is discretized at map resolution. Walking the discretized points,
/// the last kept waypoint is tested for visibility in the inflated map; at the
/// first blocked cell the robot is placed with a yaw blended between the last
/// waypoint's yaw and the local heading, pushed away from the raw obstacles,
/// and kept as a new waypoint whether or not it became safe. If the pushed
/// point cannot be reached from the last waypoint, the last visible
/// discretized point is kept instead and the scan resumes from it.
pub fn shortcut(
    path: &[Point],
    shape: &RobotShape<f64>,
    esdf: &BodyEsdf<f64>,
    raw: &Grid,
    inflated: &Grid,
    params: &ShortcutParams,
) -> Se2Path {
    let res = raw.resolution();
    let dense = discretize_polyline(path, res);
    let start = dense[0];
    let goal = *dense.last().unwrap();
    let mut out = vec![Se2Waypoint {
        position: start,
        yaw: params.start_yaw.wrap_angle(),
        provenance: Provenance::Start,
        safe: true,
    }];
    let mut last_visible: Option<usize> = None;
    let mut j = 1;
    while j < dense.len() {
        let back = *out.last().unwrap();
        let pd = dense[j];
        let blocked = match inflated.first_blocked_leaving(back.position, pd) {
            Visibility::Visible => None,
            Visibility::Blocked(pc) => Some(pc),
        };
        let Some(pc) = blocked else {
            last_visible = Some(j);
            j += 1;
            continue;
        };
        let chord = pd - back.position;
        let heading = if chord.norm() > 1e-12 { chord.angle() } else { back.yaw };
        let s = if chord.norm() > 1e-12 {
            (pc - back.position).norm() / chord.norm()
        } else {
            1.0
        };
        let seed = Pose2 {
            position: pc,
            yaw: orientation_interp(back.yaw, heading, s),
        };
        let pushed = push_away(shape, esdf, seed, raw, &params.push);
        let p_new = pushed.pose.position;
        let reachable = raw.contains_point(p_new)
            && mutually_visible(inflated, back.position, p_new)
            && p_new.distance(back.position) > 0.5 * res;
        if reachable {
            out.push(Se2Waypoint {
                position: p_new,
                yaw: pushed.pose.yaw.wrap_angle(),
                provenance: Provenance::Pushed,
                safe: pushed.safe,
            });
            last_visible = None;
            j += 1;
        } else if let Some(k) = last_visible.take() {
            let p = dense[k];
            let d = p - back.position;
            out.push(Se2Waypoint {
                position: p,
                yaw: if d.norm() > 1e-12 { d.angle() } else { back.yaw },
                provenance: Provenance::Passthrough,
                safe: true,
            });
        } else {
            // Nothing better is reachable: keep the next discretized point so
            // the scan always advances.
            let d = pd - back.position;
            out.push(Se2Waypoint {
                position: pd,
                yaw: if d.norm() > 1e-12 { d.angle() } else { back.yaw },
                provenance: Provenance::Passthrough,
                safe: true,
            });
            j += 1;
        }
    }
    if out.last().unwrap().position.distance(goal) > 1e-12 {
        out.push(Se2Waypoint {
            position: goal,
            yaw: params.goal_yaw.wrap_angle(),
            provenance: Provenance::Goal,
            safe: true,
        });
    } else {
        let last = out.last_mut().unwrap();
        last.provenance = Provenance::Goal;
        last.yaw = params.goal_yaw.wrap_angle();
    }
    if out.len() == 1 {
        // Start equals goal: keep two coincident endpoints out of the result.
        out[0].provenance = Provenance::Start;
    }
    Se2Path { waypoints: out }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopoParams {
    pub roadmap: RoadmapParams,
    /// Raw depth-first paths collected before deduplication.
    pub max_raw_paths: usize,
    pub max_path_vertices: usize,
    /// Distinct candidates passed on to shortcutting.
    pub max_candidates: usize,
    pub push: PushParams,
}

impl TopoParams {
    pub fn for_resolution(resolution: f64, kernel: &RobotKernel) -> Self {
        Self {
            roadmap: RoadmapParams::default(),
            max_raw_paths: 300,
            max_path_vertices: 24,
            max_candidates: 4,
            push: PushParams {
                margin: resolution,
                max_attempts: 20,
                yaw_step: kernel.angular_step() / 4.0,
            },
        }
    }
}

/// Whole front end: roadmap, path extraction, deduplication on the raw map,
/// shortcutting and a second deduplication of the shortcut paths.
pub fn topological_paths(
    raw: &Grid,
    inflated: &Grid,
    shape: &RobotShape<f64>,
    esdf: &BodyEsdf<f64>,
    start: Pose,
    goal: Pose,
    params: &TopoParams,
) -> Result<Vec<Se2Path>, TopoError> {
    let map = build_roadmap(inflated, start.position, goal.position, &params.roadmap)?;
    let raw_paths = extract_paths(&map, params.max_raw_paths, params.max_path_vertices);
    let mut distinct = dedup_paths(raw_paths, raw);
    distinct.truncate(params.max_candidates);
    let sc = ShortcutParams {
        push: params.push,
        start_yaw: start.yaw,
        goal_yaw: goal.yaw,
    };
    let shortened: Vec<Se2Path> = distinct
        .iter()
        .map(|p| shortcut(p, shape, esdf, raw, inflated, &sc))
        .collect();
    Ok(dedup_se2_paths(shortened, raw))
}
