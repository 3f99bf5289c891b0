//! End-to-end planning: topological candidates, motion sequences, SE(2)-first
//! sub-problem optimization, splicing, certification and selection.

use std::ops::Range;
use std::time::Instant;

use thiserror::Error;

use crate::geometry::{Pose2, Vec2};
use crate::gridmap::OccupancyGrid;
use crate::minco::{MincoError, Trajectory};
use crate::optimize::{r2_optimize, se2_optimize, unwrap_near, Anchor, OptError, SolverParams, SplineProblem, Weights};
use crate::scalar::Scalar;
use crate::sequence::{extract_subproblems, generate_sequence, safe_yaw, MotionSequence, SequenceContext, SequenceParams, SubKind, SubProblem};
use crate::shape::{BodyEsdf, RobotKernel, RobotShape};
use crate::sweep::{continuous_check, CollisionReport, SweepParams};
use crate::topo::{topological_paths, PushParams, RoadmapParams, Se2Path, TopoError, TopoParams};

type Point = Vec2<f64>;
type Grid = OccupancyGrid<f64>;
type Pose = Pose2<f64>;
type Traj = Trajectory<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanConfig {
    pub roadmap_samples: usize,
    pub seed: u64,
    /// Longest free run (cells) seeded as a narrow passage; 0 disables.
    pub narrow_run: usize,
    pub max_raw_paths: usize,
    pub max_path_vertices: usize,
    pub max_candidates: usize,
    pub n_orientations: usize,
    pub push_attempts: usize,
    pub search_range: usize,
    pub seg_max_depth: usize,
    pub risk_pad: usize,
    /// Anchor states per MINCO piece.
    pub se2_stride: usize,
    pub r2_stride: usize,
    pub weights: Weights,
    /// Safety clearance of the optimizer; the map resolution when unset.
    pub d_safe: Option<f64>,
    /// Clearance required by the final certificate.
    pub certify_margin: f64,
    pub se2_solver: SolverParams,
    pub r2_solver: SolverParams,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            roadmap_samples: 500,
            seed: 0,
            narrow_run: 5,
            max_raw_paths: 300,
            max_path_vertices: 24,
            max_candidates: 4,
            n_orientations: 18,
            push_attempts: 20,
            search_range: 4,
            seg_max_depth: 4,
            risk_pad: 5,
            se2_stride: 2,
            r2_stride: 4,
            weights: Weights::default(),
            d_safe: None,
            certify_margin: 0.0,
            se2_solver: SolverParams::default(),
            r2_solver: SolverParams::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("search range {range} exceeds half of {n} orientations")]
    SearchRange { range: usize, n: usize },
    #[error("certify margin must be non-negative")]
    NegativeMargin,
    #[error(transparent)]
    Weights(#[from] OptError),
}

impl PlanConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts = [
            ("roadmap_samples", self.roadmap_samples),
            ("max_raw_paths", self.max_raw_paths),
            ("max_path_vertices", self.max_path_vertices),
            ("max_candidates", self.max_candidates),
            ("n_orientations", self.n_orientations),
            ("push_attempts", self.push_attempts),
            ("seg_max_depth", self.seg_max_depth),
            ("se2_stride", self.se2_stride),
            ("r2_stride", self.r2_stride),
            ("se2 max_iterations", self.se2_solver.max_iterations),
            ("r2 max_iterations", self.r2_solver.max_iterations),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(ConfigError::ZeroCount(name));
            }
        }
        if self.search_range > self.n_orientations / 2 {
            return Err(ConfigError::SearchRange {
                range: self.search_range,
                n: self.n_orientations,
            });
        }
        if !(self.certify_margin >= 0.0) {
            return Err(ConfigError::NegativeMargin);
        }
        self.weights.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStatus {
    Success,
    NoPath,
    AllCandidatesFailed,
}

impl PlanStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlanStatus::Success => "success",
            PlanStatus::NoPath => "no-path",
            PlanStatus::AllCandidatesFailed => "all-candidates-failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Se2,
    R2,
    /// Open-region segment re-optimized with the swept-volume cost after the
    /// final check found it unsafe.
    R2Reoptimized,
}

impl SegmentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SegmentKind::Se2 => "se2",
            SegmentKind::R2 => "r2",
            SegmentKind::R2Reoptimized => "r2-reoptimized",
        }
    }

    pub fn is_se2(&self) -> bool {
        !matches!(self, SegmentKind::R2)
    }
}

/// A run of trajectory pieces produced by one sub-problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub pieces: Range<usize>,
    /// Arc length of the reference point (m).
    pub length: f64,
}

/// Stage timings in seconds. `total` is the sum of the stages.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timings {
    /// Inflation, roadmap, shortcutting and motion sequences.
    pub path: f64,
    pub r2: f64,
    pub se2: f64,
    /// Continuous collision checks.
    pub check: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanMetrics {
    pub timings: Timings,
    pub len_r2: f64,
    pub len_se2: f64,
    pub len_total: f64,
    pub candidates_tried: usize,
    pub candidates_survived: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateOutcome {
    pub path_id: usize,
    pub result: Result<CandidatePlan, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePlan {
    pub trajectory: Traj,
    pub segments: Vec<Segment>,
    pub certificate: CollisionReport<f64>,
    pub control_effort: f64,
}

impl CandidatePlan {
    pub fn has_se2(&self) -> bool {
        self.segments.iter().any(|s| s.kind == SegmentKind::Se2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub status: PlanStatus,
    /// Selected plan on success.
    pub plan: Option<CandidatePlan>,
    pub candidates: Vec<CandidateOutcome>,
    pub paths: Vec<Se2Path>,
    pub sequences: Vec<MotionSequence>,
    pub metrics: PlanMetrics,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
}

impl PlanResult {
    fn failed(status: PlanStatus, reason: String, metrics: PlanMetrics, warnings: Vec<String>) -> Self {
        Self {
            status,
            plan: None,
            candidates: Vec::new(),
            paths: Vec::new(),
            sequences: Vec::new(),
            metrics,
            warnings,
            failure: Some(reason),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("robot shape rejected: {0}")]
    Shape(String),
    #[error("map rejected: {0}")]
    Map(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum SpliceError {
    #[error("no trajectories to splice")]
    Empty,
    #[error("junction {index} positions differ by {gap}")]
    Mismatch { index: usize, gap: f64 },
    #[error(transparent)]
    Minco(#[from] MincoError),
}

/// Quintic with the given value, first and second derivative at both ends.
fn quintic_hermite(p0: f64, v0: f64, a0: f64, p1: f64, v1: f64, a1: f64, t: f64) -> [f64; 6] {
    let c0 = p0;
    let c1 = v0;
    let c2 = a0 / 2.0;
    let t2 = t * t;
    let t3 = t2 * t;
    let d0 = p1 - (c0 + c1 * t + c2 * t2);
    let d1 = v1 - (c1 + 2.0 * c2 * t);
    let d2 = a1 - 2.0 * c2;
    let c3 = (20.0 * d0 - 8.0 * d1 * t + d2 * t2) / (2.0 * t3);
    let c4 = (-30.0 * d0 + 14.0 * d1 * t - 2.0 * d2 * t2) / (2.0 * t3 * t);
    let c5 = (12.0 * d0 - 6.0 * d1 * t + d2 * t2) / (2.0 * t3 * t2);
    [c0, c1, c2, c3, c4, c5]
}

/// Replaces piece `i` of `coeffs` by the quintic keeping its start state and
/// ending at `(pos, vel, acc)`, or keeping its end state when `at_start`.
fn resolve_piece(coeffs: &mut [f64], traj: &Traj, i: usize, at_start: bool, vel: &[f64], acc: &[f64]) {
    let dim = traj.dim();
    let t = traj.durations()[i];
    for d in 0..dim {
        let (p0, v0, a0) = (traj.piece_eval_dim(i, 0.0, 0, d), traj.piece_eval_dim(i, 0.0, 1, d), traj.piece_eval_dim(i, 0.0, 2, d));
        let (p1, v1, a1) = (traj.piece_eval_dim(i, t, 0, d), traj.piece_eval_dim(i, t, 1, d), traj.piece_eval_dim(i, t, 2, d));
        let c = if at_start {
            quintic_hermite(p0, vel[d], acc[d], p1, v1, a1, t)
        } else {
            quintic_hermite(p0, v0, a0, p1, vel[d], acc[d], t)
        };
        for (j, cj) in c.iter().enumerate() {
            coeffs[(6 * i + j) * dim + d] = *cj;
        }
    }
}

/// Concatenates trajectories and makes velocity and acceleration continuous at
/// every junction by re-solving the two adjacent end pieces to the average of
/// both sides.
pub fn splice(parts: &[Traj]) -> Result<Traj, SpliceError> {
    if parts.is_empty() {
        return Err(SpliceError::Empty);
    }
    let mut joined = Traj::concat(parts)?;
    let mut piece = 0;
    for (index, w) in parts.windows(2).enumerate() {
        piece += w[0].num_pieces();
        let left = piece - 1;
        let dim = joined.dim();
        let tl = joined.durations()[left];
        let gap = (0..dim)
            .map(|d| (joined.piece_eval_dim(left, tl, 0, d) - joined.piece_eval_dim(piece, 0.0, 0, d)).abs())
            .fold(0.0, f64::max);
        if gap > 1e-6 {
            return Err(SpliceError::Mismatch { index, gap });
        }
        let avg = |order: usize| -> Vec<f64> {
            (0..dim)
                .map(|d| 0.5 * (joined.piece_eval_dim(left, tl, order, d) + joined.piece_eval_dim(piece, 0.0, order, d)))
                .collect()
        };
        let (vel, acc) = (avg(1), avg(2));
        let mut coeffs = joined.coeffs().to_vec();
        resolve_piece(&mut coeffs, &joined, left, false, &vel, &acc);
        resolve_piece(&mut coeffs, &joined, piece, true, &vel, &acc);
        // Snap the shared position to the left side exactly.
        for d in 0..dim {
            let p = joined.piece_eval_dim(left, tl, 0, d);
            coeffs[(6 * piece) * dim + d] = p;
        }
        joined = Traj::from_parts(dim, joined.durations().to_vec(), coeffs)?;
    }
    Ok(joined)
}

/// Arc length of the reference point over pieces `range` (Gauss-Legendre,
/// eight nodes per piece).
pub fn arc_length(traj: &Traj, range: Range<usize>) -> f64 {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    let mut total = 0.0;
    for i in range {
        let t = traj.durations()[i];
        for (x, w) in X.iter().zip(W) {
            for sign in [-1.0, 1.0] {
                let s = 0.5 * t * (1.0 + sign * x);
                let v = traj.piece_eval(i, s, 1);
                total += 0.5 * t * w * (v[0] * v[0] + v[1] * v[1]).sqrt();
            }
        }
    }
    total
}

struct Setup {
    inflated: Grid,
    kernel: RobotKernel,
    esdf: BodyEsdf<f64>,
    weights: Weights,
    sweep: SweepParams<f64>,
    seq_params: SequenceParams,
}

/// State of one candidate while its sub-problems are optimized.
struct Part {
    kind: SegmentKind,
    traj: Traj,
    /// Anchor index range covered, inclusive of both junctions.
    anchors: Range<usize>,
}

fn exact_collides(shape: &RobotShape<f64>, grid: &Grid, pose: &Pose) -> bool {
    let pts = grid.extract_obstacles(pose.position, shape.circumradius() + grid.resolution()).points;
    pts.iter().any(|&x| shape.world_sdf(x, pose) < 0.0) || !grid.contains_point(pose.position)
}

/// Requested yaw when it is free, otherwise the closest free kernel yaw.
fn settle_yaw(pose: Pose, which: &str, shape: &RobotShape<f64>, grid: &Grid, kernel: &RobotKernel, warnings: &mut Vec<String>) -> Pose {
    if !exact_collides(shape, grid, &pose) {
        return pose;
    }
    let n = kernel.n_orientations();
    let free = safe_yaw(pose.position, kernel.nearest_index(pose.yaw), kernel, grid, n / 2);
    for k in free {
        let cand = Pose2 {
            position: pose.position,
            yaw: kernel.yaw_of(k),
        };
        if !exact_collides(shape, grid, &cand) {
            warnings.push(format!("{which} yaw {:.4} collides; using {:.4}", pose.yaw, cand.yaw));
            return cand;
        }
    }
    pose
}

fn anchors_of(seq: &MotionSequence, kernel: &RobotKernel, start: &Pose, goal: &Pose) -> Vec<Anchor> {
    let n = seq.states.len();
    let mut out = Vec::with_capacity(n);
    let mut prev = start.yaw;
    for (i, s) in seq.states.iter().enumerate() {
        let raw = if i == 0 {
            start.yaw
        } else if i + 1 == n {
            goal.yaw
        } else {
            kernel.yaw_of(s.orientation)
        };
        let yaw = if i == 0 { raw } else { unwrap_near(raw, prev) };
        out.push(Anchor {
            position: s.position,
            yaw,
        });
        prev = yaw;
    }
    out
}

/// Velocity at a junction anchor: nominal speed along the local tangent, yaw
/// rate from the neighbouring anchors. Zero at the ends of the sequence.
fn junction_rates(anchors: &[Anchor], j: usize, w: &Weights) -> ([f64; 3], [f64; 3]) {
    if j == 0 || j + 1 >= anchors.len() {
        return ([0.0; 3], [0.0; 3]);
    }
    let a = anchors[j - 1];
    let b = anchors[j + 1];
    let d = b.position - a.position;
    let len = d.norm();
    if len < 1e-9 {
        return ([0.0; 3], [0.0; 3]);
    }
    let v_nom = w.v_max / 2.0;
    let dir = d * (1.0 / len);
    let yaw_rate = ((b.yaw - a.yaw) * v_nom / len).clamp(-w.omega_max / 2.0, w.omega_max / 2.0);
    ([dir.x * v_nom, dir.y * v_nom, yaw_rate], [0.0; 3])
}

fn sub_problem(anchors: &[Anchor], range: Range<usize>, stride: usize, w: &Weights) -> SplineProblem {
    SplineProblem {
        anchors: anchors[range.start..range.end].to_vec(),
        start_rates: junction_rates(anchors, range.start, w),
        end_rates: junction_rates(anchors, range.end - 1, w),
        stride,
    }
}

fn state_at(traj: &Traj, t: f64) -> (Anchor, [f64; 3], [f64; 3]) {
    let p = traj.eval(t, 0).expect("time inside trajectory");
    let v = traj.eval(t, 1).expect("time inside trajectory");
    let a = traj.eval(t, 2).expect("time inside trajectory");
    (
        Anchor {
            position: Point::new(p[0], p[1]),
            yaw: p[2],
        },
        [v[0], v[1], v[2]],
        [a[0], a[1], a[2]],
    )
}

/// States of `traj` on `[t0, t1]` at (nearly) equal arc-length spacing of
/// about `step`, both ends included.
fn resample(traj: &Traj, t0: f64, t1: f64, step: f64) -> Vec<Anchor> {
    const FINE: usize = 256;
    let times: Vec<f64> = (0..=FINE).map(|k| t0 + (t1 - t0) * k as f64 / FINE as f64).collect();
    let states: Vec<Anchor> = times.iter().map(|&t| state_at(traj, t).0).collect();
    let mut cum = vec![0.0];
    for w in states.windows(2) {
        cum.push(cum.last().unwrap() + w[0].position.distance(w[1].position));
    }
    let total = *cum.last().unwrap();
    let n = ((total / step).ceil() as usize).max(2);
    let mut out = Vec::with_capacity(n + 1);
    let mut j = 0;
    for k in 0..=n {
        let target = total * k as f64 / n as f64;
        while j + 1 < FINE && cum[j + 1] < target {
            j += 1;
        }
        out.push(states[if k == n { FINE } else { j }]);
    }
    out
}

fn assemble(parts: &[Part], traj: &Traj) -> Vec<Segment> {
    let mut out = Vec::with_capacity(parts.len());
    let mut first = 0;
    for p in parts {
        let r = first..first + p.traj.num_pieces();
        first = r.end;
        out.push(Segment {
            kind: p.kind,
            length: arc_length(traj, r.clone()),
            pieces: r,
        });
    }
    out
}

/// Pieces of the spliced trajectory touched by the certificate's intervals.
fn colliding_pieces(traj: &Traj, report: &CollisionReport<f64>) -> Vec<usize> {
    let mut out = Vec::new();
    for iv in &report.intervals {
        let (a, _) = traj.locate(iv.t_start);
        let (b, _) = traj.locate(iv.t_end);
        out.extend(a..=b);
    }
    out.sort_unstable();
    out.dedup();
    out
}

struct Timer {
    at: Instant,
}

impl Timer {
    fn start() -> Self {
        Self { at: Instant::now() }
    }

    fn lap(&mut self, slot: &mut f64) {
        let now = Instant::now();
        *slot += (now - self.at).as_secs_f64();
        self.at = now;
    }
}

fn plan_candidate(
    seq: &MotionSequence,
    shape: &RobotShape<f64>,
    grid: &Grid,
    setup: &Setup,
    config: &PlanConfig,
    start: &Pose,
    goal: &Pose,
    timings: &mut Timings,
    timer: &mut Timer,
) -> Result<CandidatePlan, String> {
    let w = &setup.weights;
    let anchors = anchors_of(seq, &setup.kernel, start, goal);
    if anchors.len() < 2 {
        return Err("motion sequence has a single state".into());
    }
    let subs: Vec<SubProblem> = extract_subproblems(seq, setup.seq_params.pad);
    let mut parts: Vec<Option<Part>> = (0..subs.len()).map(|_| None).collect();
    for (k, sub) in subs.iter().enumerate() {
        if sub.kind != SubKind::Se2 {
            continue;
        }
        let range = sub.offset..sub.offset + sub.states.len();
        let problem = sub_problem(&anchors, range.clone(), config.se2_stride, w);
        let out = se2_optimize(&problem, w, shape, grid, &config.se2_solver).map_err(|e| format!("SE(2) sub-problem {k}: {e}"));
        timer.lap(&mut timings.se2);
        let out = out?;
        if out.collision_free != Some(true) {
            return Err(format!("SE(2) sub-problem {k} is not collision-free"));
        }
        parts[k] = Some(Part {
            kind: SegmentKind::Se2,
            traj: out.trajectory,
            anchors: range,
        });
    }
    for (k, sub) in subs.iter().enumerate() {
        if sub.kind != SubKind::R2 {
            continue;
        }
        let range = sub.offset..sub.offset + sub.states.len();
        let problem = sub_problem(&anchors, range.clone(), config.r2_stride, w);
        let out = r2_optimize(&problem, w, &config.r2_solver).map_err(|e| format!("R2 sub-problem {k}: {e}"));
        timer.lap(&mut timings.r2);
        parts[k] = Some(Part {
            kind: SegmentKind::R2,
            traj: out?.trajectory,
            anchors: range,
        });
    }
    let mut parts: Vec<Part> = parts.into_iter().map(|p| p.expect("every sub-problem optimized")).collect();
    let spliced = splice(&parts.iter().map(|p| p.traj.clone()).collect::<Vec<_>>()).map_err(|e| e.to_string());
    timer.lap(&mut timings.r2);
    let mut traj = spliced?;
    let mut report = continuous_check(&traj, shape, grid, config.certify_margin, setup.sweep);
    timer.lap(&mut timings.check);
    if !report.is_clear() {
        parts = reoptimize(parts, &traj, &report, &anchors, shape, grid, config, w, timings, timer)?;
        let spliced = splice(&parts.iter().map(|p| p.traj.clone()).collect::<Vec<_>>()).map_err(|e| e.to_string());
        timer.lap(&mut timings.se2);
        traj = spliced?;
        report = continuous_check(&traj, shape, grid, config.certify_margin, setup.sweep);
        timer.lap(&mut timings.check);
        if !report.is_clear() {
            return Err(format!("collision remains after re-optimization (depth {:.4} m)", report.max_depth()));
        }
    }
    let segments = assemble(&parts, &traj);
    Ok(CandidatePlan {
        control_effort: traj.control_effort(),
        trajectory: traj,
        segments,
        certificate: report,
    })
}

/// One round of swept-volume re-optimization of the unsafe open-region pieces.
/// Each colliding piece, padded by one neighbouring piece on each side inside
/// its segment, becomes an SE(2) problem whose boundary states are taken from
/// the current trajectory.
#[allow(clippy::too_many_arguments)]
fn reoptimize(
    parts: Vec<Part>,
    traj: &Traj,
    report: &CollisionReport<f64>,
    anchors: &[Anchor],
    shape: &RobotShape<f64>,
    grid: &Grid,
    config: &PlanConfig,
    w: &Weights,
    timings: &mut Timings,
    timer: &mut Timer,
) -> Result<Vec<Part>, String> {
    let bad = colliding_pieces(traj, report);
    let mut out = Vec::with_capacity(parts.len());
    let mut first = 0;
    for part in parts {
        let n = part.traj.num_pieces();
        let local: Vec<usize> = bad.iter().filter(|&&p| p >= first && p < first + n).map(|&p| p - first).collect();
        first += n;
        if local.is_empty() {
            out.push(part);
            continue;
        }
        if part.kind != SegmentKind::R2 {
            return Err(format!("{} segment collides in the final check", part.kind.as_str()));
        }
        // Merge padded piece ranges.
        let mut ranges: Vec<Range<usize>> = Vec::new();
        for p in local {
            let r = p.saturating_sub(1)..(p + 2).min(n);
            match ranges.last_mut() {
                Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
                _ => ranges.push(r),
            }
        }
        let bp = part.traj.breakpoints();
        let breaks = {
            let sub = SplineProblem::at_rest(anchors[part.anchors.clone()].to_vec(), config.r2_stride);
            sub.breaks().into_iter().map(|b| b + part.anchors.start).collect::<Vec<_>>()
        };
        let mut cursor = 0;
        let mut pieces: Vec<Part> = Vec::new();
        let slice = |a: usize, b: usize| -> Result<Traj, String> {
            let m = part.traj.dim();
            Traj::from_parts(
                m,
                part.traj.durations()[a..b].to_vec(),
                part.traj.coeffs()[6 * a * m..6 * b * m].to_vec(),
            )
            .map_err(|e| e.to_string())
        };
        for r in ranges {
            if r.start > cursor {
                pieces.push(Part {
                    kind: SegmentKind::R2,
                    traj: slice(cursor, r.start)?,
                    anchors: breaks[cursor]..breaks[r.start] + 1,
                });
            }
            let (_, v0, acc0) = state_at(&part.traj, bp[r.start]);
            let (_, v1, acc1) = state_at(&part.traj, bp[r.end]);
            let chain = resample(&part.traj, bp[r.start], bp[r.end], grid.resolution());
            let problem = SplineProblem {
                anchors: chain,
                start_rates: (v0, acc0),
                end_rates: (v1, acc1),
                stride: config.se2_stride,
            };
            let res = se2_optimize(&problem, w, shape, grid, &config.se2_solver).map_err(|e| format!("re-optimization: {e}"));
            timer.lap(&mut timings.se2);
            let res = res?;
            if res.collision_free != Some(true) {
                return Err("re-optimized segment is not collision-free".into());
            }
            pieces.push(Part {
                kind: SegmentKind::R2Reoptimized,
                traj: res.trajectory,
                anchors: breaks[r.start]..breaks[r.end] + 1,
            });
            cursor = r.end;
        }
        if cursor < n {
            pieces.push(Part {
                kind: SegmentKind::R2,
                traj: slice(cursor, n)?,
                anchors: breaks[cursor]..breaks[n] + 1,
            });
        }
        out.extend(pieces);
    }
    Ok(out)
}

/// Plans a collision-free SE(2) trajectory from `start` to `goal`.
pub fn plan(grid: &Grid, shape: &RobotShape<f64>, start: Pose, goal: Pose, config: &PlanConfig) -> Result<PlanResult, PlanError> {
    config.validate()?;
    let mut timings = Timings::default();
    let mut timer = Timer::start();
    let mut warnings = Vec::new();
    let res = grid.resolution();
    let inflated = grid.inflate(shape.inscribed_radius()).map_err(|e| PlanError::Map(e.to_string()))?;
    let kernel = RobotKernel::build(shape, config.n_orientations, res).map_err(|e| PlanError::Shape(e.to_string()))?;
    let esdf = BodyEsdf::build(shape, res / 2.0, (3.0 * res).max(0.3)).map_err(|e| PlanError::Shape(e.to_string()))?;
    let mut weights = config.weights;
    weights.d_safe = config.d_safe.unwrap_or(res);
    let push = PushParams {
        margin: res,
        max_attempts: config.push_attempts,
        yaw_step: kernel.angular_step() / 4.0,
    };
    let setup = Setup {
        inflated,
        seq_params: SequenceParams {
            search_range: config.search_range,
            max_depth: config.seg_max_depth,
            pad: config.risk_pad,
            push,
        },
        kernel,
        esdf,
        weights,
        sweep: SweepParams::for_resolution(res),
    };
    let start = Pose2 {
        position: start.position,
        yaw: start.yaw.wrap_angle(),
    };
    let goal = Pose2 {
        position: goal.position,
        yaw: goal.yaw.wrap_angle(),
    };
    let start = settle_yaw(start, "start", shape, grid, &setup.kernel, &mut warnings);
    let goal = settle_yaw(goal, "goal", shape, grid, &setup.kernel, &mut warnings);
    let finish = |mut t: Timings| {
        t.total = t.path + t.r2 + t.se2 + t.check;
        t
    };

    let topo = TopoParams {
        roadmap: RoadmapParams {
            samples: config.roadmap_samples,
            seed: config.seed,
            narrow_run: config.narrow_run,
        },
        max_raw_paths: config.max_raw_paths,
        max_path_vertices: config.max_path_vertices,
        max_candidates: config.max_candidates,
        push,
    };
    let paths = match topological_paths(grid, &setup.inflated, shape, &setup.esdf, start, goal, &topo) {
        Ok(p) => p,
        Err(e @ (TopoError::InfeasibleEndpoint { .. } | TopoError::OutOfBounds { .. })) => {
            timer.lap(&mut timings.path);
            let metrics = PlanMetrics {
                timings: finish(timings),
                ..PlanMetrics::default()
            };
            return Ok(PlanResult::failed(PlanStatus::NoPath, e.to_string(), metrics, warnings));
        }
        Err(e) => return Err(PlanError::Map(e.to_string())),
    };
    if paths.is_empty() {
        timer.lap(&mut timings.path);
        let metrics = PlanMetrics {
            timings: finish(timings),
            ..PlanMetrics::default()
        };
        return Ok(PlanResult::failed(
            PlanStatus::NoPath,
            "start and goal are not connected in the inflated map".into(),
            metrics,
            warnings,
        ));
    }
    let ctx = SequenceContext {
        shape,
        esdf: &setup.esdf,
        kernel: &setup.kernel,
        grid,
        params: setup.seq_params,
    };
    let sequences: Vec<MotionSequence> = paths.iter().enumerate().map(|(i, p)| generate_sequence(p, i, &ctx)).collect();
    timer.lap(&mut timings.path);

    let mut candidates = Vec::with_capacity(sequences.len());
    for seq in &sequences {
        let result = plan_candidate(seq, shape, grid, &setup, config, &start, &goal, &mut timings, &mut timer);
        candidates.push(CandidateOutcome {
            path_id: seq.path_id,
            result,
        });
    }
    let best = candidates
        .iter()
        .filter_map(|c| c.result.as_ref().ok())
        .min_by(|a, b| a.control_effort.partial_cmp(&b.control_effort).unwrap_or(std::cmp::Ordering::Equal))
        .cloned();
    let survived = candidates.iter().filter(|c| c.result.is_ok()).count();
    let mut metrics = PlanMetrics {
        timings: finish(timings),
        candidates_tried: candidates.len(),
        candidates_survived: survived,
        ..PlanMetrics::default()
    };
    let (status, failure) = match &best {
        Some(p) => {
            for s in &p.segments {
                if s.kind.is_se2() {
                    metrics.len_se2 += s.length;
                } else {
                    metrics.len_r2 += s.length;
                }
            }
            metrics.len_total = metrics.len_r2 + metrics.len_se2;
            (PlanStatus::Success, None)
        }
        None => {
            let reasons: Vec<String> = candidates
                .iter()
                .filter_map(|c| c.result.as_ref().err().map(|e| format!("candidate {}: {e}", c.path_id)))
                .collect();
            (PlanStatus::AllCandidatesFailed, Some(reasons.join("; ")))
        }
    };
    Ok(PlanResult {
        status,
        plan: best,
        candidates,
        paths,
        sequences,
        metrics,
        warnings,
        failure,
    })
}
