//! Planar vectors, poses and polygon primitives.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A 2D vector or point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector pointing along `angle`.
    #[inline]
    pub fn from_angle(angle: T) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Returns the unit vector, or zero for a (near) zero vector.
    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n > T::epsilon() {
            self / n
        } else {
            Self::zero()
        }
    }

    /// Counter-clockwise perpendicular.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// `R(angle) * self`.
    #[inline]
    pub fn rotated(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// `R(angle)^T * self`.
    #[inline]
    pub fn rotated_inv(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x + s * self.y, -s * self.x + c * self.y)
    }

    /// Heading angle of the vector.
    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn lerp(self, o: Self, s: T) -> Self {
        self + (o - self) * s
    }

    pub fn cast<U: Scalar>(self) -> Vec2<U> {
        Vec2::new(
            U::lit(self.x.to_f64_lossy()),
            U::lit(self.y.to_f64_lossy()),
        )
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> Div<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Scalar> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Scalar> SubAssign for Vec2<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

/// Planar rigid pose. `yaw` rotates body coordinates into the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2<T> {
    pub position: Vec2<T>,
    pub yaw: T,
}

impl<T: Scalar> Pose2<T> {
    pub fn new(x: T, y: T, yaw: T) -> Self {
        Self {
            position: Vec2::new(x, y),
            yaw,
        }
    }

    /// Maps a body-frame point to the world frame.
    #[inline]
    pub fn to_world(&self, body: Vec2<T>) -> Vec2<T> {
        self.position + body.rotated(self.yaw)
    }

    /// Maps a world point into the body frame.
    #[inline]
    pub fn to_body(&self, world: Vec2<T>) -> Vec2<T> {
        (world - self.position).rotated_inv(self.yaw)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec2<T>,
    pub max: Vec2<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn empty() -> Self {
        Self {
            min: Vec2::new(T::infinity(), T::infinity()),
            max: Vec2::new(T::neg_infinity(), T::neg_infinity()),
        }
    }

    pub fn from_points(points: impl IntoIterator<Item = Vec2<T>>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.include(p);
        }
        b
    }

    pub fn include(&mut self, p: Vec2<T>) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn expanded(&self, by: T) -> Self {
        Self {
            min: self.min - Vec2::new(by, by),
            max: self.max + Vec2::new(by, by),
        }
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Euclidean distance from `p` to the box (0 inside).
    pub fn distance_to(&self, p: Vec2<T>) -> T {
        let dx = (self.min.x - p.x).max(p.x - self.max.x).max(T::zero());
        let dy = (self.min.y - p.y).max(p.y - self.max.y).max(T::zero());
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }
}

/// Closest point on segment `[a, b]` to `p` and its segment parameter.
#[inline]
pub fn closest_on_segment<T: Scalar>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> (Vec2<T>, T) {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq <= T::zero() {
        return (a, T::zero());
    }
    let t = ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one());
    (a + ab * t, t)
}

#[inline]
pub fn point_segment_distance<T: Scalar>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> T {
    closest_on_segment(p, a, b).0.distance(p)
}

/// Winding number of the closed polygon `poly` around `p`.
///
/// Points exactly on the boundary get an implementation-defined value; callers
/// that care test the boundary distance separately.
pub fn winding_number<T: Scalar>(p: Vec2<T>, poly: &[Vec2<T>]) -> i32 {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let side = (b - a).cross(p - a);
        if a.y <= p.y {
            if b.y > p.y && side > T::zero() {
                wn += 1;
            }
        } else if b.y <= p.y && side < T::zero() {
            wn -= 1;
        }
    }
    wn
}

/// Distance from `p` to the polygon boundary together with the closest
/// boundary point.
pub fn boundary_distance<T: Scalar>(p: Vec2<T>, poly: &[Vec2<T>]) -> (T, Vec2<T>) {
    let n = poly.len();
    let mut best = T::infinity();
    let mut best_pt = poly[0];
    for i in 0..n {
        let (c, _) = closest_on_segment(p, poly[i], poly[(i + 1) % n]);
        let d = (p - c).norm_sq();
        if d < best {
            best = d;
            best_pt = c;
        }
    }
    (best.sqrt(), best_pt)
}

/// Below this distance a point counts as lying on the polygon boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Signed distance from `p` to the polygon: negative inside, positive
/// outside, `+0` on the boundary.
pub fn polygon_sdf<T: Scalar>(p: Vec2<T>, poly: &[Vec2<T>]) -> T {
    polygon_sdf_with_gradient(p, poly).0
}

/// Signed distance and its spatial gradient.
///
/// The gradient is the unit vector from the closest boundary point, flipped
/// inside the polygon. On the medial axis any of the tied closest points may
/// be used.
pub fn polygon_sdf_with_gradient<T: Scalar>(p: Vec2<T>, poly: &[Vec2<T>]) -> (T, Vec2<T>) {
    let (d, c) = boundary_distance(p, poly);
    if d <= T::lit(BOUNDARY_TOLERANCE) {
        // Outward normal of the nearest edge stands in for the gradient.
        return (T::zero(), boundary_normal(p, poly));
    }
    let dir = (p - c) / d;
    if winding_number(p, poly) != 0 {
        (-d, -dir)
    } else {
        (d, dir)
    }
}

fn boundary_normal<T: Scalar>(p: Vec2<T>, poly: &[Vec2<T>]) -> Vec2<T> {
    let n = poly.len();
    let mut best = T::infinity();
    let mut normal = Vec2::new(T::one(), T::zero());
    let ccw = signed_area(poly) > T::zero();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let d = point_segment_distance(p, a, b);
        if d < best {
            best = d;
            let e = (b - a).normalized();
            // Outward normal is to the right of a counter-clockwise edge.
            normal = if ccw { Vec2::new(e.y, -e.x) } else { Vec2::new(-e.y, e.x) };
        }
    }
    normal
}

/// `true` if `p` is inside the polygon or within `tol` of its boundary.
pub fn contains_closed<T: Scalar>(p: Vec2<T>, poly: &[Vec2<T>], tol: T) -> bool {
    if winding_number(p, poly) != 0 {
        return true;
    }
    boundary_distance(p, poly).0 <= tol
}

/// Shoelace area, positive for counter-clockwise vertex order.
pub fn signed_area<T: Scalar>(poly: &[Vec2<T>]) -> T {
    let n = poly.len();
    let mut a = T::zero();
    for i in 0..n {
        a += poly[i].cross(poly[(i + 1) % n]);
    }
    a / T::lit(2.0)
}

/// Area centroid of a simple polygon.
pub fn centroid<T: Scalar>(poly: &[Vec2<T>]) -> Vec2<T> {
    let n = poly.len();
    let area = signed_area(poly);
    if area.abs() <= T::epsilon() {
        let sum = poly.iter().fold(Vec2::zero(), |acc, &p| acc + p);
        return sum / T::from_usize_lossy(n);
    }
    let mut c = Vec2::zero();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let w = a.cross(b);
        c += (a + b) * w;
    }
    c / (T::lit(6.0) * area)
}

fn orient<T: Scalar>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    (b - a).cross(c - a)
}

fn on_segment<T: Scalar>(a: Vec2<T>, b: Vec2<T>, p: Vec2<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test.
pub fn segments_intersect<T: Scalar>(p1: Vec2<T>, p2: Vec2<T>, q1: Vec2<T>, q2: Vec2<T>) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    (d1 == z && on_segment(q1, q2, p1))
        || (d2 == z && on_segment(q1, q2, p2))
        || (d3 == z && on_segment(p1, p2, q1))
        || (d4 == z && on_segment(p1, p2, q2))
}

/// `true` if no two non-adjacent edges touch and the polygon has non-zero area.
pub fn is_simple<T: Scalar>(poly: &[Vec2<T>]) -> bool {
    let n = poly.len();
    if n < 3 || signed_area(poly).abs() <= T::epsilon() {
        return false;
    }
    for i in 0..n {
        let a1 = poly[i];
        let a2 = poly[(i + 1) % n];
        if a1 == a2 {
            return false;
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let b1 = poly[j];
            let b2 = poly[(j + 1) % n];
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

/// Length of a polyline.
pub fn polyline_length<T: Scalar>(points: &[Vec2<T>]) -> T {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Resamples a polyline at `n + 1` points uniformly spaced by arc length.
pub fn resample_polyline<T: Scalar>(points: &[Vec2<T>], n: usize) -> Vec<Vec2<T>> {
    assert!(!points.is_empty());
    let n = n.max(1);
    let total = polyline_length(points);
    if points.len() == 1 || total <= T::zero() {
        return vec![points[0]; n + 1];
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut seg = 0;
    let mut seg_start = T::zero();
    for i in 0..=n {
        let target = total * T::from_usize_lossy(i) / T::from_usize_lossy(n);
        loop {
            let len = points[seg].distance(points[seg + 1]);
            if target <= seg_start + len || seg + 2 >= points.len() {
                let s = if len > T::zero() {
                    ((target - seg_start) / len).max(T::zero()).min(T::one())
                } else {
                    T::zero()
                };
                out.push(points[seg].lerp(points[seg + 1], s));
                break;
            }
            seg_start += len;
            seg += 1;
        }
    }
    *out.last_mut().unwrap() = *points.last().unwrap();
    out
}

/// Uniformly discretizes the segment `a -> b` with spacing at most `step`,
/// including both endpoints.
pub fn discretize_segment<T: Scalar>(a: Vec2<T>, b: Vec2<T>, step: T) -> Vec<Vec2<T>> {
    let len = a.distance(b);
    let n = (len / step).ceil().to_usize().unwrap_or(1).max(1);
    let mut out: Vec<_> = (0..=n)
        .map(|i| a.lerp(b, T::from_usize_lossy(i) / T::from_usize_lossy(n)))
        .collect();
    *out.last_mut().unwrap() = b;
    out
}

/// Uniformly discretizes a polyline, keeping every vertex and dropping the
/// duplicated joints.
pub fn discretize_polyline<T: Scalar>(points: &[Vec2<T>], step: T) -> Vec<Vec2<T>> {
    let mut out = vec![points[0]];
    for w in points.windows(2) {
        let seg = discretize_segment(w[0], w[1], step);
        out.extend_from_slice(&seg[1..]);
    }
    out
}
