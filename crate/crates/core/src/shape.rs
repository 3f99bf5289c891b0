//! Robot geometry: polygon footprint, body-frame signed distance field and the
//! rasterized per-orientation footprint kernel.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{
    boundary_distance, centroid, is_simple, polygon_sdf, polygon_sdf_with_gradient, winding_number,
    Aabb, Pose2, Vec2, BOUNDARY_TOLERANCE,
};
use crate::gridmap::OccupancyGrid;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ShapeError {
    #[error("robot polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("robot polygon is not simple")]
    NotSimple,
    #[error("reference point lies outside the robot polygon")]
    ReferenceOutside,
    #[error("body-frame point ({x}, {y}) lies outside the distance field window")]
    OutOfWindow { x: f64, y: f64 },
    #[error("malformed shape (line {line}): {reason}")]
    Malformed { line: usize, reason: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Simple polygon in the body frame; the body origin is the rotation center.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotShape<T> {
    vertices: Vec<Vec2<T>>,
    /// Reference point in the coordinates the shape was defined in.
    reference: Vec2<T>,
}

impl<T: Scalar> RobotShape<T> {
    /// Builds a shape from vertices given in an arbitrary frame. The body
    /// origin is placed at `reference`, or at the area centroid if `None`.
    pub fn new(vertices: Vec<Vec2<T>>, reference: Option<Vec2<T>>) -> Result<Self, ShapeError> {
        if vertices.len() < 3 {
            return Err(ShapeError::TooFewVertices(vertices.len()));
        }
        if !is_simple(&vertices) {
            return Err(ShapeError::NotSimple);
        }
        let reference = reference.unwrap_or_else(|| centroid(&vertices));
        let body: Vec<_> = vertices.iter().map(|&v| v - reference).collect();
        if polygon_sdf(Vec2::zero(), &body) >= T::zero() {
            return Err(ShapeError::ReferenceOutside);
        }
        Ok(Self {
            vertices: body,
            reference,
        })
    }

    /// Axis-aligned `length` (along body x) by `width` rectangle centered on
    /// the reference point.
    pub fn rectangle(length: T, width: T) -> Result<Self, ShapeError> {
        let hx = length / T::lit(2.0);
        let hy = width / T::lit(2.0);
        Self::new(
            vec![
                Vec2::new(-hx, -hy),
                Vec2::new(hx, -hy),
                Vec2::new(hx, hy),
                Vec2::new(-hx, hy),
            ],
            Some(Vec2::zero()),
        )
    }

    /// Body-frame vertices.
    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn reference(&self) -> Vec2<T> {
        self.reference
    }

    /// Radius of the largest disc about the reference point inside the polygon.
    pub fn inscribed_radius(&self) -> T {
        boundary_distance(Vec2::zero(), &self.vertices).0
    }

    /// Largest distance from the reference point to the polygon.
    pub fn circumradius(&self) -> T {
        self.vertices.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    /// Signed distance of a body-frame point to the robot boundary.
    #[inline]
    pub fn body_sdf(&self, q: Vec2<T>) -> T {
        polygon_sdf(q, &self.vertices)
    }

    /// Signed distance and exact body-frame gradient.
    #[inline]
    pub fn body_sdf_with_gradient(&self, q: Vec2<T>) -> (T, Vec2<T>) {
        polygon_sdf_with_gradient(q, &self.vertices)
    }

    /// Signed distance of a world point to the robot placed at `pose`.
    #[inline]
    pub fn world_sdf(&self, x: Vec2<T>, pose: &Pose2<T>) -> T {
        self.body_sdf(pose.to_body(x))
    }

    /// Polygon outline placed at `pose`.
    pub fn outline(&self, pose: &Pose2<T>) -> Vec<Vec2<T>> {
        self.vertices.iter().map(|&v| pose.to_world(v)).collect()
    }

    pub fn body_aabb(&self) -> Aabb<T> {
        Aabb::from_points(self.vertices.iter().copied())
    }

    /// Parses `vertex: x y` lines plus an optional `reference: x y` line.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(source: &str) -> Result<Self, ShapeError> {
        let mut vertices = Vec::new();
        let mut reference = None;
        for (i, raw) in source.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(':').ok_or_else(|| ShapeError::Malformed {
                line: i + 1,
                reason: "expected `key: x y`".into(),
            })?;
            let nums: Vec<f64> = rest
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| ShapeError::Malformed {
                    line: i + 1,
                    reason: "bad number".into(),
                })?;
            if nums.len() != 2 {
                return Err(ShapeError::Malformed {
                    line: i + 1,
                    reason: "expected two numbers".into(),
                });
            }
            let p = Vec2::new(T::lit(nums[0]), T::lit(nums[1]));
            match key.trim() {
                "vertex" => vertices.push(p),
                "reference" => reference = Some(p),
                other => {
                    return Err(ShapeError::Malformed {
                        line: i + 1,
                        reason: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        Self::new(vertices, reference)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let p = *v + self.reference;
            let _ = writeln!(s, "vertex: {} {}", p.x, p.y);
        }
        let _ = writeln!(s, "reference: {} {}", self.reference.x, self.reference.y);
        s
    }
}

/// Inscribed radius of `poly` about an arbitrary `center`.
pub fn inscribed_radius_at<T: Scalar>(poly: &[Vec2<T>], center: Vec2<T>) -> Result<T, ShapeError> {
    if polygon_sdf(center, poly) >= T::zero() {
        return Err(ShapeError::ReferenceOutside);
    }
    Ok(boundary_distance(center, poly).0)
}

/// Body-frame signed distance grid covering the robot plus padding.
#[derive(Debug, Clone)]
pub struct BodyEsdf<T> {
    origin: Vec2<T>,
    nx: usize,
    ny: usize,
    resolution: T,
    values: Vec<T>,
    gradients: Vec<Vec2<T>>,
}

impl<T: Scalar> BodyEsdf<T> {
    /// Samples the exact body SDF at every cell center of the window
    /// `AABB(shape) ± padding`.
    pub fn build(shape: &RobotShape<T>, resolution: T, padding: T) -> Result<Self, ShapeError> {
        if !(resolution > T::zero()) {
            return Err(ShapeError::InvalidParameter("resolution must be positive"));
        }
        if padding < resolution {
            return Err(ShapeError::InvalidParameter("padding must be at least one cell"));
        }
        let window = shape.body_aabb().expanded(padding);
        let extent = window.max - window.min;
        let nx = (extent.x / resolution).ceil().to_usize().unwrap().max(3);
        let ny = (extent.y / resolution).ceil().to_usize().unwrap().max(3);
        let origin = window.min;
        let half = T::lit(0.5);
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let q = origin
                    + Vec2::new(
                        (T::from_usize_lossy(i) + half) * resolution,
                        (T::from_usize_lossy(j) + half) * resolution,
                    );
                values.push(shape.body_sdf(q));
            }
        }
        let mut esdf = Self {
            origin,
            nx,
            ny,
            resolution,
            values,
            gradients: Vec::new(),
        };
        esdf.gradients = (0..nx * ny)
            .map(|idx| esdf.cell_gradient(idx % nx, idx / nx))
            .collect();
        Ok(esdf)
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Body-frame window covered by the grid.
    pub fn window(&self) -> Aabb<T> {
        Aabb {
            min: self.origin,
            max: self.origin
                + Vec2::new(
                    T::from_usize_lossy(self.nx) * self.resolution,
                    T::from_usize_lossy(self.ny) * self.resolution,
                ),
        }
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[j * self.nx + i]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2<T> {
        let half = T::lit(0.5);
        self.origin
            + Vec2::new(
                (T::from_usize_lossy(i) + half) * self.resolution,
                (T::from_usize_lossy(j) + half) * self.resolution,
            )
    }

    /// Central differences between neighbouring cells; one-sided on the border.
    fn cell_gradient(&self, i: usize, j: usize) -> Vec2<T> {
        let h = self.resolution;
        let two = T::lit(2.0);
        let gx = if i == 0 {
            (self.value(1, j) - self.value(0, j)) / h
        } else if i == self.nx - 1 {
            (self.value(i, j) - self.value(i - 1, j)) / h
        } else {
            (self.value(i + 1, j) - self.value(i - 1, j)) / (two * h)
        };
        let gy = if j == 0 {
            (self.value(i, 1) - self.value(i, 0)) / h
        } else if j == self.ny - 1 {
            (self.value(i, j) - self.value(i, j - 1)) / h
        } else {
            (self.value(i, j + 1) - self.value(i, j - 1)) / (two * h)
        };
        Vec2::new(gx, gy)
    }

    /// Bilinearly interpolated value and gradient at a body-frame point.
    pub fn query_body(&self, q: Vec2<T>) -> Result<(T, Vec2<T>), ShapeError> {
        if !self.window().contains(q) {
            return Err(ShapeError::OutOfWindow {
                x: q.x.to_f64_lossy(),
                y: q.y.to_f64_lossy(),
            });
        }
        let u = (q - self.origin) / self.resolution - Vec2::new(T::lit(0.5), T::lit(0.5));
        let (i0, fx) = split_cell(u.x, self.nx);
        let (j0, fy) = split_cell(u.y, self.ny);
        let one = T::one();
        let w = [
            (i0, j0, (one - fx) * (one - fy)),
            (i0 + 1, j0, fx * (one - fy)),
            (i0, j0 + 1, (one - fx) * fy),
            (i0 + 1, j0 + 1, fx * fy),
        ];
        let mut value = T::zero();
        let mut grad = Vec2::zero();
        for (i, j, wt) in w {
            value += self.values[j * self.nx + i] * wt;
            grad += self.gradients[j * self.nx + i] * wt;
        }
        Ok((value, grad))
    }

    /// Transforms a world obstacle point into the body frame of a robot at
    /// `pose` and returns the interpolated signed distance together with the
    /// world-frame gradient (steepest ascent as `x_obs` moves in the world).
    pub fn sdf_gradient_world(&self, x_obs: Vec2<T>, pose: &Pose2<T>) -> Result<(T, Vec2<T>), ShapeError> {
        let (v, g) = self.query_body(pose.to_body(x_obs))?;
        Ok((v, g.rotated(pose.yaw)))
    }
}

/// Cell index of the lower interpolation corner and the fractional offset.
fn split_cell<T: Scalar>(u: T, n: usize) -> (usize, T) {
    let max0 = n - 2;
    let clamped = u.max(T::zero()).min(T::from_usize_lossy(n - 1));
    let i0 = clamped.floor().to_usize().unwrap_or(0).min(max0);
    let f = (clamped - T::from_usize_lossy(i0)).max(T::zero()).min(T::one());
    (i0, f)
}

/// Rasterized robot footprints at `n_orientations` evenly spaced yaws.
///
/// Orientation `k` has yaw `k * 2π / n`. Offsets are cell deltas, at map
/// resolution, from the cell holding the reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotKernel {
    n_orientations: usize,
    resolution: f64,
    footprints: Vec<Vec<(i32, i32)>>,
}

impl RobotKernel {
    /// Rasterizes the polygon: orientation `k` keeps the offsets whose cell
    /// centers lie strictly inside the rotated polygon placed on the
    /// reference cell center. An empty raster keeps the reference cell.
    pub fn build<T: Scalar>(shape: &RobotShape<T>, n_orientations: usize, resolution: T) -> Result<Self, ShapeError> {
        if n_orientations == 0 {
            return Err(ShapeError::InvalidParameter("n_orientations must be at least 1"));
        }
        if !(resolution > T::zero()) {
            return Err(ShapeError::InvalidParameter("resolution must be positive"));
        }
        let step = T::TAU() / T::from_usize_lossy(n_orientations);
        let mut footprints = Vec::with_capacity(n_orientations);
        for k in 0..n_orientations {
            let yaw = step * T::from_usize_lossy(k);
            let rotated: Vec<_> = shape.vertices().iter().map(|v| v.rotated(yaw)).collect();
            let bb = Aabb::from_points(rotated.iter().copied());
            let lo_x = (bb.min.x / resolution).floor().to_i32().unwrap() - 1;
            let hi_x = (bb.max.x / resolution).ceil().to_i32().unwrap() + 1;
            let lo_y = (bb.min.y / resolution).floor().to_i32().unwrap() - 1;
            let hi_y = (bb.max.y / resolution).ceil().to_i32().unwrap() + 1;
            let mut cells = Vec::new();
            for dy in lo_y..=hi_y {
                for dx in lo_x..=hi_x {
                    let c = Vec2::new(T::from_i32(dx).unwrap() * resolution, T::from_i32(dy).unwrap() * resolution);
                    if strictly_inside(c, &rotated) {
                        cells.push((dx, dy));
                    }
                }
            }
            if cells.is_empty() {
                cells.push((0, 0));
            }
            footprints.push(cells);
        }
        Ok(Self {
            n_orientations,
            resolution: resolution.to_f64_lossy(),
            footprints,
        })
    }

    pub fn n_orientations(&self) -> usize {
        self.n_orientations
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Angular spacing between orientations, radians.
    pub fn angular_step(&self) -> f64 {
        std::f64::consts::TAU / self.n_orientations as f64
    }

    pub fn yaw_of(&self, k: usize) -> f64 {
        (self.angular_step() * k as f64).wrap_angle()
    }

    /// Orientation index closest to `yaw`.
    pub fn nearest_index(&self, yaw: f64) -> usize {
        let step = self.angular_step();
        let k = (yaw.rem_euclid(std::f64::consts::TAU) / step).round() as usize;
        k % self.n_orientations
    }

    pub fn footprint(&self, k: usize) -> &[(i32, i32)] {
        &self.footprints[k]
    }

    /// Boolean convolution of footprint `k` placed on the cell holding `p`
    /// with the occupancy map. Out-of-bounds cells count as occupied.
    pub fn collides<T: Scalar>(&self, grid: &OccupancyGrid<T>, p: Vec2<T>, k: usize) -> bool {
        let (cx, cy) = grid.cell_of(p);
        self.footprints[k]
            .iter()
            .any(|&(dx, dy)| grid.occupancy(cx + dx as i64, cy + dy as i64).unwrap_or(true))
    }

    /// Number of footprint cells of orientation `k` that hit occupied or
    /// out-of-bounds cells.
    pub fn collision_count<T: Scalar>(&self, grid: &OccupancyGrid<T>, p: Vec2<T>, k: usize) -> usize {
        let (cx, cy) = grid.cell_of(p);
        self.footprints[k]
            .iter()
            .filter(|&&(dx, dy)| grid.occupancy(cx + dx as i64, cy + dy as i64).unwrap_or(true))
            .count()
    }
}

fn strictly_inside<T: Scalar>(p: Vec2<T>, poly: &[Vec2<T>]) -> bool {
    winding_number(p, poly) != 0 && boundary_distance(p, poly).0 > T::lit(BOUNDARY_TOLERANCE)
}

/// Free-standing form of [`RobotKernel::collides`].
pub fn kernel_collides<T: Scalar>(kernel: &RobotKernel, grid: &OccupancyGrid<T>, p: Vec2<T>, k: usize) -> bool {
    kernel.collides(grid, p, k)
}
