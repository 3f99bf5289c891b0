//! Swept-volume signed distance queries and continuous collision checking of
//! SE(2) trajectories (`x`, `y`, unwrapped `yaw`).
//!
//! For a world point `x`, `f(t) = body_sdf(R(yaw(t))ᵀ (x - pos(t)))` is
//! Lipschitz in `t` with constant `|v| + |ω| · |x - pos|`. Time intervals are
//! searched best-first by their Lipschitz lower bound: an interval is bisected
//! while its bound spans more than the step distance, then refined by
//! golden-section search. Intervals are dropped only when the bound proves
//! they cannot matter, so a "no value below the cutoff" verdict is exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::{Aabb, Pose2, Vec2};
use crate::gridmap::OccupancyGrid;
use crate::minco::Trajectory;
use crate::scalar::Scalar;
use crate::shape::RobotShape;

/// Sampling and refinement tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams<T> {
    /// Intervals whose Lipschitz spread is below this are refined directly (meters).
    pub step_distance: T,
    /// Golden-section stopping width (seconds).
    pub time_tolerance: T,
    /// Bisection budget per piece; once spent, undecided intervals go
    /// straight to golden-section refinement.
    pub max_samples_per_piece: usize,
    /// Evaluations of `f` per query. When spent, the best value seen is
    /// returned without proof; `usize::MAX` keeps queries exact.
    pub max_evaluations: usize,
}

impl<T: Scalar> SweepParams<T> {
    /// Coarse spacing of half a map cell.
    pub fn for_resolution(resolution: T) -> Self {
        Self {
            step_distance: resolution * T::lit(0.5),
            time_tolerance: T::lit(1e-9),
            max_samples_per_piece: 4096,
            max_evaluations: usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweptQueryResult<T> {
    /// Minimum over the window of the body SDF, or a lower bound no smaller
    /// than the cutoff when `refined` is false and a cutoff was given.
    pub value: T,
    pub t_star: T,
    pub refined: bool,
}

/// Robot pose at time `t` of an SE(2) trajectory.
pub fn pose_at<T: Scalar>(traj: &Trajectory<T>, t: T) -> Pose2<T> {
    let (i, s) = traj.locate(t);
    pose_on_piece(traj, i, s)
}

#[inline]
fn pose_on_piece<T: Scalar>(traj: &Trajectory<T>, i: usize, s: T) -> Pose2<T> {
    Pose2::new(
        traj.piece_eval_dim(i, s, 0, 0),
        traj.piece_eval_dim(i, s, 0, 1),
        traj.piece_eval_dim(i, s, 0, 2),
    )
}

/// Per-piece quantities shared by every query on one trajectory.
#[derive(Debug, Clone)]
pub struct SweepContext<'a, T> {
    traj: &'a Trajectory<T>,
    shape: &'a RobotShape<T>,
    params: SweepParams<T>,
    starts: Vec<T>,
    speed: Vec<T>,
    yaw_rate: Vec<T>,
    boxes: Vec<Aabb<T>>,
    circumradius: T,
}

impl<'a, T: Scalar> SweepContext<'a, T> {
    pub fn new(traj: &'a Trajectory<T>, shape: &'a RobotShape<T>, params: SweepParams<T>) -> Self {
        assert_eq!(traj.dim(), 3, "swept queries need an SE(2) trajectory");
        let m = traj.num_pieces();
        let mut speed = Vec::with_capacity(m);
        let mut yaw_rate = Vec::with_capacity(m);
        let mut boxes = Vec::with_capacity(m);
        for i in 0..m {
            let vx = traj.derivative_bound(i, 1, 0);
            let vy = traj.derivative_bound(i, 1, 1);
            speed.push((vx * vx + vy * vy).sqrt());
            yaw_rate.push(traj.derivative_bound(i, 1, 2));
            let (x0, x1) = traj.value_bounds(i, 0);
            let (y0, y1) = traj.value_bounds(i, 1);
            boxes.push(Aabb {
                min: Vec2::new(x0, y0),
                max: Vec2::new(x1, y1),
            });
        }
        let mut starts = traj.breakpoints();
        starts.pop();
        Self {
            traj,
            shape,
            params,
            starts,
            speed,
            yaw_rate,
            boxes,
            circumradius: shape.circumradius(),
        }
    }

    pub fn trajectory(&self) -> &Trajectory<T> {
        self.traj
    }

    /// Enclosure of every position reached by the reference point.
    pub fn position_bounds(&self) -> Aabb<T> {
        let mut out = Aabb::empty();
        for b in &self.boxes {
            out.include(b.min);
            out.include(b.max);
        }
        out
    }

    /// Coarse sampling step used on piece `i` for point `x`.
    fn piece_lipschitz(&self, i: usize, x: Vec2<T>) -> T {
        let b = &self.boxes[i];
        let dx = (x.x - b.min.x).abs().max((x.x - b.max.x).abs());
        let dy = (x.y - b.min.y).abs().max((x.y - b.max.y).abs());
        self.speed[i] + self.yaw_rate[i] * (dx * dx + dy * dy).sqrt()
    }

    #[inline]
    fn f_piece(&self, i: usize, s: T, x: Vec2<T>) -> T {
        self.shape.body_sdf(pose_on_piece(self.traj, i, s).to_body(x))
    }

    /// Body SDF of `x` against the robot at global time `t`.
    pub fn f(&self, t: T, x: Vec2<T>) -> T {
        let (i, s) = self.traj.locate(t);
        self.f_piece(i, s, x)
    }

    /// Minimum over the whole trajectory.
    pub fn query(&self, x: Vec2<T>) -> SweptQueryResult<T> {
        self.query_window(x, T::zero(), self.traj.total_duration(), None)
    }

    /// Minimum over `[t0, t1]`. With `cutoff`, work stops as soon as the
    /// value is proven to be at least `cutoff`; the returned value is then a
    /// lower bound that is itself at least `cutoff`.
    pub fn query_window(&self, x: Vec2<T>, t0: T, t1: T, cutoff: Option<T>) -> SweptQueryResult<T> {
        let mut best = SweptQueryResult {
            value: T::infinity(),
            t_star: t0,
            refined: false,
        };
        let mut heap: BinaryHeap<Interval<T>> = BinaryHeap::new();
        let mut floor = T::infinity();
        let mut budget = 0usize;
        let evals = std::cell::Cell::new(0usize);
        let f = |i: usize, s: T| {
            evals.set(evals.get() + 1);
            self.f_piece(i, s, x)
        };
        for i in 0..self.traj.num_pieces() {
            let ps = self.starts[i];
            let pe = ps + self.traj.durations()[i];
            let a = t0.max(ps);
            let b = t1.min(pe);
            if a > b {
                continue;
            }
            if let Some(c) = cutoff {
                let lb = self.boxes[i].distance_to(x) - self.circumradius;
                if lb >= c {
                    floor = floor.min(lb);
                    continue;
                }
            }
            budget += self.params.max_samples_per_piece;
            let lip = self.piece_lipschitz(i, x);
            let fa = f(i, a - ps);
            let fb = f(i, b - ps);
            for (t, v) in [(a, fa), (b, fb)] {
                if v < best.value {
                    best.value = v;
                    best.t_star = t;
                }
            }
            heap.push(Interval::new(a, b, fa, fb, lip, i));
        }
        if best.value == T::infinity() {
            // Every piece was excluded by its bounding box.
            best.value = floor;
            return best;
        }
        let eps = T::lit(1e-12);
        while let Some(iv) = heap.pop() {
            if evals.get() >= self.params.max_evaluations {
                heap.push(iv);
                break;
            }
            let target = match cutoff {
                Some(c) => best.value.min(c),
                None => best.value,
            };
            if iv.lb >= target - eps {
                heap.push(iv);
                break;
            }
            let ps = self.starts[iv.piece];
            if iv.lip * (iv.b - iv.a) <= self.params.step_distance || budget == 0 {
                let (t, v) = golden_section_min(|t| f(iv.piece, t - ps), iv.a, iv.b, iv.fa, iv.fb, self.params.time_tolerance);
                best.refined = true;
                if v < best.value {
                    best.value = v;
                    best.t_star = t;
                }
                continue;
            }
            budget -= 1;
            let m = (iv.a + iv.b) * T::lit(0.5);
            let fm = f(iv.piece, m - ps);
            if fm < best.value {
                best.value = fm;
                best.t_star = m;
            }
            heap.push(Interval::new(iv.a, m, iv.fa, fm, iv.lip, iv.piece));
            heap.push(Interval::new(m, iv.b, fm, iv.fb, iv.lip, iv.piece));
        }
        if let Some(c) = cutoff {
            if best.value >= c {
                // Report the proven bound rather than the best sample found.
                let lb = heap.peek().map_or(best.value, |v| v.lb).min(floor);
                best.value = best.value.min(lb).max(c);
            }
        }
        best
    }
}

/// Time interval of one piece with the Lipschitz lower bound of `f` on it.
struct Interval<T> {
    lb: T,
    a: T,
    b: T,
    fa: T,
    fb: T,
    lip: T,
    piece: usize,
}

impl<T: Scalar> Interval<T> {
    fn new(a: T, b: T, fa: T, fb: T, lip: T, piece: usize) -> Self {
        Self {
            lb: (fa + fb - lip * (b - a)) * T::lit(0.5),
            a,
            b,
            fa,
            fb,
            lip,
            piece,
        }
    }
}

impl<T: Scalar> PartialEq for Interval<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Interval<T> {}

impl<T: Scalar> PartialOrd for Interval<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Interval<T> {
    // Reversed so the max-heap pops the smallest bound; ties by start time
    // keep the search order deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lb
            .partial_cmp(&self.lb)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

/// Minimizes `f` on `[a, b]` by golden-section search, given `f(a)` and
/// `f(b)`. Returns the best point seen, endpoints included.
pub fn golden_section_min<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, fa: T, fb: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let (mut lo, mut hi) = (a, b);
    let mut best = if fa <= fb { (a, fa) } else { (b, fb) };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if f1 < best.1 {
            best = (x1, f1);
        }
        if f2 < best.1 {
            best = (x2, f2);
        }
    }
    if f1 < best.1 {
        best = (x1, f1);
    }
    if f2 < best.1 {
        best = (x2, f2);
    }
    best
}

/// Swept-volume signed distance of `x_obs` over the time window.
pub fn swept_sdf<T: Scalar>(
    traj: &Trajectory<T>,
    shape: &RobotShape<T>,
    x_obs: Vec2<T>,
    window: (T, T),
    params: SweepParams<T>,
) -> SweptQueryResult<T> {
    SweepContext::new(traj, shape, params).query_window(x_obs, window.0, window.1, None)
}

/// Group of colliding obstacle points with nearby arg-min times.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionInterval<T> {
    pub t_start: T,
    pub t_end: T,
    /// Deepest obstacle point of the group.
    pub witness: Vec2<T>,
    /// `margin - swept_sdf` at the witness.
    pub depth: T,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionReport<T> {
    pub intervals: Vec<CollisionInterval<T>>,
    pub points_checked: usize,
    pub margin: T,
}

impl<T: Scalar> CollisionReport<T> {
    pub fn is_clear(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn max_depth(&self) -> T {
        self.intervals.iter().map(|c| c.depth).fold(T::zero(), T::max)
    }
}

/// Checks every occupied cell center near the swept region against the whole
/// trajectory; points with swept SDF below `margin` are reported.
pub fn continuous_check<T: Scalar>(
    traj: &Trajectory<T>,
    shape: &RobotShape<T>,
    grid: &OccupancyGrid<T>,
    margin: T,
    params: SweepParams<T>,
) -> CollisionReport<T> {
    let ctx = SweepContext::new(traj, shape, params);
    let region = ctx.position_bounds().expanded(shape.circumradius() + margin);
    let points = grid.obstacles_in(&region);
    let total = traj.total_duration();
    let mut hits: Vec<(T, Vec2<T>, T)> = Vec::new();
    for &p in &points.points {
        let r = ctx.query_window(p, T::zero(), total, Some(margin));
        if r.value < margin {
            hits.push((r.t_star, p, margin - r.value));
        }
    }
    hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let gap = params.step_distance * T::lit(2.0) / ctx.max_lipschitz(&region).max(T::lit(1e-9));
    let mut intervals: Vec<CollisionInterval<T>> = Vec::new();
    for (t, p, depth) in hits {
        match intervals.last_mut() {
            Some(last) if t - last.t_end < gap => {
                last.t_end = t;
                last.points += 1;
                if depth > last.depth {
                    last.depth = depth;
                    last.witness = p;
                }
            }
            _ => intervals.push(CollisionInterval {
                t_start: t,
                t_end: t,
                witness: p,
                depth,
                points: 1,
            }),
        }
    }
    CollisionReport {
        intervals,
        points_checked: points.points.len(),
        margin,
    }
}

impl<T: Scalar> SweepContext<'_, T> {
    fn max_lipschitz(&self, region: &Aabb<T>) -> T {
        let extent = (region.max - region.min).norm();
        (0..self.traj.num_pieces())
            .map(|i| self.speed[i] + self.yaw_rate[i] * extent)
            .fold(T::zero(), T::max)
    }
}

/// Robot outlines at `n` evenly spaced times (the first at `t = 0`).
pub fn swept_boundary_samples<T: Scalar>(traj: &Trajectory<T>, shape: &RobotShape<T>, n: usize) -> Vec<Vec<Vec2<T>>> {
    let total = traj.total_duration();
    (0..n.max(1))
        .map(|k| {
            let t = if n <= 1 {
                T::zero()
            } else {
                total * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1)
            };
            shape.outline(&pose_at(traj, t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minco::{construct, Boundary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square() -> RobotShape<f64> {
        RobotShape::rectangle(1.0, 1.0).unwrap()
    }

    fn params() -> SweepParams<f64> {
        SweepParams::for_resolution(0.1)
    }

    fn line(from: [f64; 3], to: [f64; 3], t: f64) -> Trajectory<f64> {
        construct(&Boundary::rest(from.to_vec()), &Boundary::rest(to.to_vec()), &[], &[t]).unwrap()
    }

    fn dense_min(traj: &Trajectory<f64>, shape: &RobotShape<f64>, x: Vec2<f64>, n: usize) -> f64 {
        let total = traj.total_duration();
        (0..=n)
            .map(|k| shape.world_sdf(x, &pose_at(traj, total * k as f64 / n as f64)))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn stationary_matches_body_sdf() {
        let s = square();
        let traj = line([0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 1.0);
        for x in [Vec2::new(2.0, 0.3), Vec2::new(0.1, 0.0), Vec2::new(0.5, 0.5)] {
            let r = swept_sdf(&traj, &s, x, (0.0, 1.0), params());
            assert!((r.value - s.body_sdf(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn capsule_distance_for_translation() {
        // 64-gon with an edge facing +y: apothem r, so the swept distance of a
        // point above the middle of the motion is exactly d - r.
        let r = 0.3;
        let n = 64;
        let circ = r / (std::f64::consts::PI / n as f64).cos();
        let verts: Vec<_> = (0..n)
            .map(|k| Vec2::from_angle(std::f64::consts::FRAC_PI_2 + (k as f64 + 0.5) * std::f64::consts::TAU / n as f64) * circ)
            .collect();
        let disc = RobotShape::new(verts, Some(Vec2::zero())).unwrap();
        let traj = line([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], 2.0);
        for d in [0.35, 0.5, 1.0] {
            let v = swept_sdf(&traj, &disc, Vec2::new(1.0, d), (0.0, 2.0), params());
            assert!((v.value - (d - r)).abs() < 1e-6, "{d}: {}", v.value);
            assert!((v.t_star - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn boundary_point_is_zero() {
        let s = square();
        let traj = line([0.0, 0.0, 0.0], [1.0, 0.5, 1.0], 1.0);
        let v = swept_sdf(&traj, &s, Vec2::new(-0.5, 0.2), (0.0, 1.0), params());
        assert!(v.value.abs() < 1e-9);
    }

    fn tee() -> RobotShape<f64> {
        RobotShape::new(
            vec![
                Vec2::new(-0.4, -0.1),
                Vec2::new(0.4, -0.1),
                Vec2::new(0.4, 0.1),
                Vec2::new(0.05, 0.1),
                Vec2::new(0.05, 0.3),
                Vec2::new(-0.05, 0.3),
                Vec2::new(-0.05, 0.1),
                Vec2::new(-0.4, 0.1),
            ],
            Some(Vec2::zero()),
        )
        .unwrap()
    }

    #[test]
    fn matches_dense_oracle_on_short_motions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let shape = tee();
        for _ in 0..20 {
            let mut v = |s: f64| rng.gen_range(-s..s);
            let traj = construct(
                &Boundary::rest(vec![v(0.5), v(0.5), v(3.0)]),
                &Boundary::rest(vec![v(0.5), v(0.5), v(3.0)]),
                &[],
                &[1.0],
            )
            .unwrap();
            let mut traj = traj;
            // Keep the motion short: at most 0.3 m and 0.3 rad.
            let a = traj.eval(0.0, 0).unwrap();
            let b = traj.eval(1.0, 0).unwrap();
            let clip = |d: f64| d.clamp(-0.3, 0.3);
            traj = construct(
                &Boundary::rest(a.clone()),
                &Boundary::rest(vec![a[0] + clip(b[0] - a[0]), a[1] + clip(b[1] - a[1]), a[2] + clip(b[2] - a[2])]),
                &[],
                &[1.0],
            )
            .unwrap();
            for _ in 0..10 {
                let x = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let r = swept_sdf(&traj, &shape, x, (0.0, 1.0), params());
                let oracle = dense_min(&traj, &shape, x, 10_000);
                assert!(r.value <= oracle + 1e-12);
                assert!((r.value - oracle).abs() < 1e-4, "{} vs {}", r.value, oracle);
            }
        }
    }

    #[test]
    fn fast_motions_stay_within_oracle_sampling_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shape = tee();
        for _ in 0..10 {
            let mut v = || rng.gen_range(-1.0..1.0);
            let traj = construct(
                &Boundary::rest(vec![v(), v(), v()]),
                &Boundary::rest(vec![v(), v(), 2.0 * v()]),
                &[v(), v(), v()],
                &[0.7, 0.9],
            )
            .unwrap();
            let ctx = SweepContext::new(&traj, &shape, params());
            let total = traj.total_duration();
            for _ in 0..5 {
                let x = Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
                let r = ctx.query(x);
                let n = 10_000;
                let oracle = dense_min(&traj, &shape, x, n);
                let lip = (0..2).map(|i| ctx.piece_lipschitz(i, x)).fold(0.0, f64::max);
                assert!(r.value <= oracle + 1e-12);
                assert!(oracle - r.value <= lip * total / n as f64 * 0.5 + 1e-12);
                // Doubling the sampling density changes nothing beyond tolerance.
                let mut fine = params();
                fine.step_distance *= 0.5;
                let r2 = swept_sdf(&traj, &shape, x, (0.0, total), fine);
                assert!(r2.value <= r.value + 1e-6);
                // Time reversal sweeps the same set.
                let rev = traj.reversed();
                let r3 = swept_sdf(&rev, &shape, x, (0.0, total), params());
                assert!((r3.value - r.value).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lipschitz_sanity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = square();
        let traj = construct(
            &Boundary::rest(vec![0.0, 0.0, 0.0]),
            &Boundary::rest(vec![2.0, 1.0, 1.5]),
            &[1.0, -0.3, 0.5],
            &[1.0, 1.2],
        )
        .unwrap();
        let ctx = SweepContext::new(&traj, &s, params());
        let x = Vec2::new(1.0, 1.0);
        let total = traj.total_duration();
        for _ in 0..200 {
            let t1 = rng.gen_range(0.0..total);
            let t2 = (t1 + rng.gen_range(-0.05..0.05)).clamp(0.0, total);
            let (i1, _) = traj.locate(t1);
            let (i2, _) = traj.locate(t2);
            let lip = ctx.piece_lipschitz(i1, x).max(ctx.piece_lipschitz(i2, x));
            assert!((ctx.f(t1, x) - ctx.f(t2, x)).abs() <= lip * (t1 - t2).abs() + 1e-12);
        }
    }

    #[test]
    fn cutoff_gives_sound_lower_bound() {
        let s = square();
        let traj = line([0.0, 0.0, 0.0], [3.0, 0.0, 0.8], 2.0);
        let ctx = SweepContext::new(&traj, &s, params());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let x = Vec2::new(rng.gen_range(-2.0..5.0), rng.gen_range(-2.0..2.0));
            let exact = ctx.query(x).value;
            let cut = ctx.query_window(x, 0.0, 2.0, Some(0.1));
            assert!(cut.value <= exact + 1e-12);
            assert_eq!(cut.value < 0.1, exact < 0.1);
            if exact < 0.1 {
                assert!((cut.value - exact).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn continuous_check_cases() {
        let s = square();
        let mut grid = OccupancyGrid::new(60, 40, 0.1, Vec2::zero()).unwrap();
        let traj = line([1.0, 2.0, 0.0], [5.0, 2.0, 0.0], 3.0);
        assert!(continuous_check(&traj, &s, &grid, 0.0, params()).is_clear());
        // Wall across the path at x = 3.05.
        for j in 0..40 {
            grid.set_occupied(30, j, true);
        }
        let rep = continuous_check(&traj, &s, &grid, 0.0, params());
        assert!(!rep.is_clear());
        assert!((rep.intervals[0].witness.x - 3.05).abs() < 1e-9);
        // Wall cells nearest the path axis sit 0.05 off it.
        assert!((rep.max_depth() - 0.45).abs() < 1e-6);
        // Pass alongside a horizontal wall with clearance 0.2 and margin 0.1.
        let mut grid = OccupancyGrid::new(60, 40, 0.1, Vec2::zero()).unwrap();
        for i in 0..60 {
            grid.set_occupied(i, 27, true);
        }
        let traj = line([1.0, 2.0, 0.0], [5.0, 2.0, 0.0], 3.0);
        let margin = 0.1;
        let rep = continuous_check(&traj, &s, &grid, margin, params());
        let oracle = (0..60)
            .map(|i| dense_min(&traj, &s, grid.cell_center(i, 27), 2000))
            .fold(f64::INFINITY, f64::min);
        assert!(oracle > margin);
        assert!(rep.is_clear());
        assert!(rep.points_checked > 0);
    }

    #[test]
    fn outline_samples() {
        let s = square();
        let still = line([1.0, 1.0, 0.3], [1.0, 1.0, 0.3], 1.0);
        let one = swept_boundary_samples(&still, &s, 1);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0], s.outline(&Pose2::new(1.0, 1.0, 0.3)));
        let many = swept_boundary_samples(&still, &s, 5);
        assert!(many.windows(2).all(|w| w[0] == w[1]));
        let moving = line([0.0, 0.0, 0.0], [2.0, 1.0, 0.0], 1.0);
        let outs = swept_boundary_samples(&moving, &s, 4);
        for o in &outs[1..] {
            let shift = o[0] - outs[0][0];
            for (a, b) in o.iter().zip(&outs[0]) {
                assert!((*a - *b - shift).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn golden_section_on_parabola() {
        let (t, v) = golden_section_min(|x: f64| (x - 0.3) * (x - 0.3), 0.0, 1.0, 0.09, 0.49, 1e-10);
        assert!((t - 0.3).abs() < 1e-8);
        assert!(v < 1e-15);
    }
}
