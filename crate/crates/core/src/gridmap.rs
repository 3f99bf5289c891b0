//! Occupancy grid environment: parsing, inflation, obstacle extraction and
//! line-of-sight queries.
//!
//! Cell `(ix, iy)` covers `[origin + (ix, iy) * res, origin + (ix + 1, iy + 1) * res)`.
//! In the text format the first raster row is the top of the map (largest `y`).

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{Aabb, Vec2};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("malformed map (line {line}): {reason}")]
    Malformed { line: usize, reason: String },
    #[error("invalid grid dimensions {width}x{height} or resolution")]
    InvalidDimensions { width: usize, height: usize },
    #[error("inflation radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("point ({x}, {y}) lies outside the grid")]
    OutOfBounds { x: f64, y: f64 },
}

/// 2D boolean occupancy field (`true` = occupied).
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid<T> {
    width: usize,
    height: usize,
    resolution: T,
    origin: Vec2<T>,
    cells: Vec<bool>,
}

/// Result of a line-of-sight query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Visibility<T> {
    Visible,
    /// Center of the first occupied cell met when walking from the start.
    Blocked(Vec2<T>),
}

impl<T> Visibility<T> {
    pub fn is_visible(&self) -> bool {
        matches!(self, Visibility::Visible)
    }
}

/// Centers of occupied cells, in world coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObstaclePointSet<T> {
    pub points: Vec<Vec2<T>>,
}

impl<T> ObstaclePointSet<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl<T: Scalar> OccupancyGrid<T> {
    /// An all-free grid.
    pub fn new(width: usize, height: usize, resolution: T, origin: Vec2<T>) -> Result<Self, GridError> {
        if width == 0 || height == 0 || !(resolution > T::zero()) || !resolution.is_finite() {
            return Err(GridError::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            cells: vec![false; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn origin(&self) -> Vec2<T> {
        self.origin
    }

    /// World extent of the grid.
    pub fn bounds(&self) -> Aabb<T> {
        Aabb {
            min: self.origin,
            max: self.origin
                + Vec2::new(
                    T::from_usize_lossy(self.width) * self.resolution,
                    T::from_usize_lossy(self.height) * self.resolution,
                ),
        }
    }

    #[inline]
    fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    #[inline]
    pub fn is_occupied(&self, ix: usize, iy: usize) -> bool {
        self.cells[self.index(ix, iy)]
    }

    pub fn set_occupied(&mut self, ix: usize, iy: usize, occupied: bool) {
        let i = self.index(ix, iy);
        self.cells[i] = occupied;
    }

    /// Occupancy of a signed cell index; `None` outside the grid.
    #[inline]
    pub fn occupancy(&self, ix: i64, iy: i64) -> Option<bool> {
        if ix < 0 || iy < 0 || ix >= self.width as i64 || iy >= self.height as i64 {
            None
        } else {
            Some(self.cells[self.index(ix as usize, iy as usize)])
        }
    }

    /// Signed index of the cell containing `p` (may lie outside the grid).
    #[inline]
    pub fn cell_of(&self, p: Vec2<T>) -> (i64, i64) {
        let rel = (p - self.origin) / self.resolution;
        (
            rel.x.floor().to_i64().unwrap_or(i64::MIN / 4),
            rel.y.floor().to_i64().unwrap_or(i64::MIN / 4),
        )
    }

    pub fn in_bounds(&self, ix: i64, iy: i64) -> bool {
        ix >= 0 && iy >= 0 && ix < self.width as i64 && iy < self.height as i64
    }

    pub fn contains_point(&self, p: Vec2<T>) -> bool {
        let (ix, iy) = self.cell_of(p);
        self.in_bounds(ix, iy)
    }

    /// Occupancy at a world point; outside the grid counts as occupied.
    pub fn is_occupied_at(&self, p: Vec2<T>) -> bool {
        let (ix, iy) = self.cell_of(p);
        self.occupancy(ix, iy).unwrap_or(true)
    }

    #[inline]
    pub fn cell_center(&self, ix: i64, iy: i64) -> Vec2<T> {
        let half = T::lit(0.5);
        self.origin
            + Vec2::new(
                (T::from_i64(ix).unwrap() + half) * self.resolution,
                (T::from_i64(iy).unwrap() + half) * self.resolution,
            )
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Iterates occupied cells in row-major order.
    pub fn occupied_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Parses the text map format:
    ///
    /// ```text
    /// resolution: 0.1
    /// origin: 0 0
    /// .#.
    /// ...
    /// ```
    pub fn parse(source: &str) -> Result<Self, GridError> {
        let mut resolution: Option<T> = None;
        let mut origin = Vec2::zero();
        let mut rows: Vec<(usize, &str)> = Vec::new();
        for (lineno, raw) in source.lines().enumerate() {
            let line = raw.trim();
            let line_no = lineno + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("resolution:") {
                let r: f64 = rest.trim().parse().map_err(|_| GridError::Malformed {
                    line: line_no,
                    reason: format!("bad resolution `{}`", rest.trim()),
                })?;
                if !(r > 0.0) || !r.is_finite() {
                    return Err(GridError::Malformed {
                        line: line_no,
                        reason: "resolution must be positive".into(),
                    });
                }
                resolution = Some(T::lit(r));
            } else if let Some(rest) = line.strip_prefix("origin:") {
                let vals: Vec<f64> = rest
                    .split_whitespace()
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|_| GridError::Malformed {
                        line: line_no,
                        reason: "bad origin".into(),
                    })?;
                if vals.len() != 2 {
                    return Err(GridError::Malformed {
                        line: line_no,
                        reason: "origin needs two numbers".into(),
                    });
                }
                origin = Vec2::new(T::lit(vals[0]), T::lit(vals[1]));
            } else {
                if let Some(c) = line.chars().find(|c| *c != '#' && *c != '.') {
                    return Err(GridError::Malformed {
                        line: line_no,
                        reason: format!("unknown raster character `{c}`"),
                    });
                }
                rows.push((line_no, line));
            }
        }
        let resolution = resolution.ok_or(GridError::Malformed {
            line: 0,
            reason: "missing `resolution:` header".into(),
        })?;
        if rows.is_empty() {
            return Err(GridError::Malformed {
                line: 0,
                reason: "empty raster".into(),
            });
        }
        let width = rows[0].1.len();
        if let Some((line, row)) = rows.iter().find(|(_, r)| r.len() != width) {
            return Err(GridError::Malformed {
                line: *line,
                reason: format!("ragged row of length {} (expected {width})", row.len()),
            });
        }
        let height = rows.len();
        let mut grid = Self::new(width, height, resolution, origin)?;
        for (r, (_, row)) in rows.iter().enumerate() {
            let iy = height - 1 - r;
            for (ix, ch) in row.bytes().enumerate() {
                if ch == b'#' {
                    grid.set_occupied(ix, iy, true);
                }
            }
        }
        Ok(grid)
    }

    /// Serializes into the text map format (inverse of [`parse`](Self::parse)).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "resolution: {}", self.resolution);
        let _ = writeln!(s, "origin: {} {}", self.origin.x, self.origin.y);
        for iy in (0..self.height).rev() {
            for ix in 0..self.width {
                s.push(if self.is_occupied(ix, iy) { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }

    /// Marks every cell whose center lies within `radius` of an occupied
    /// cell center.
    pub fn inflate(&self, radius: T) -> Result<Self, GridError> {
        if radius < T::zero() || radius.is_nan() {
            return Err(GridError::NegativeRadius(radius.to_f64_lossy()));
        }
        let r_cells = (radius / self.resolution).to_f64_lossy();
        let reach = r_cells.floor() as i64;
        let limit = r_cells * r_cells + 1e-9;
        let mut offsets = Vec::new();
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if ((dx * dx + dy * dy) as f64) <= limit {
                    offsets.push((dx, dy));
                }
            }
        }
        let mut out = self.clone();
        for (ix, iy) in self.occupied_cells() {
            for &(dx, dy) in &offsets {
                let (x, y) = (ix as i64 + dx, iy as i64 + dy);
                if self.in_bounds(x, y) {
                    let i = out.index(x as usize, y as usize);
                    out.cells[i] = true;
                }
            }
        }
        Ok(out)
    }

    /// Centers of occupied cells inside the box `center ± half_extent`.
    pub fn extract_obstacles(&self, center: Vec2<T>, half_extent: T) -> ObstaclePointSet<T> {
        let (x0, y0) = self.cell_of(center - Vec2::new(half_extent, half_extent));
        let (x1, y1) = self.cell_of(center + Vec2::new(half_extent, half_extent));
        let x0 = x0.max(0);
        let y0 = y0.max(0);
        let x1 = x1.min(self.width as i64 - 1);
        let y1 = y1.min(self.height as i64 - 1);
        let mut points = Vec::new();
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                if self.is_occupied(ix as usize, iy as usize) {
                    let c = self.cell_center(ix, iy);
                    if (c.x - center.x).abs() <= half_extent && (c.y - center.y).abs() <= half_extent {
                        points.push(c);
                    }
                }
            }
        }
        ObstaclePointSet { points }
    }

    /// Occupied cell centers inside an axis-aligned box.
    pub fn obstacles_in(&self, aabb: &Aabb<T>) -> ObstaclePointSet<T> {
        let half = (aabb.max - aabb.min) * T::lit(0.5);
        let center = aabb.min + half;
        let h = half.x.max(half.y);
        let mut set = self.extract_obstacles(center, h);
        set.points.retain(|p| aabb.contains(*p));
        set
    }

    /// Cells touched by the segment `a -> b`, in traversal order (supercover).
    ///
    /// When the segment passes exactly through a cell corner both side cells
    /// are reported. Cells outside the grid are skipped.
    pub fn traverse(&self, a: Vec2<T>, b: Vec2<T>) -> Vec<(i64, i64)> {
        let (mut ix, mut iy) = self.cell_of(a);
        let (ex, ey) = self.cell_of(b);
        let d = b - a;
        let res = self.resolution;
        let step_x: i64 = if d.x > T::zero() { 1 } else if d.x < T::zero() { -1 } else { 0 };
        let step_y: i64 = if d.y > T::zero() { 1 } else if d.y < T::zero() { -1 } else { 0 };
        let boundary = |i: i64, step: i64, o: T| -> T {
            let k = if step > 0 { i + 1 } else { i };
            o + T::from_i64(k).unwrap() * res
        };
        let mut t_max_x = if step_x != 0 {
            (boundary(ix, step_x, self.origin.x) - a.x) / d.x
        } else {
            T::infinity()
        };
        let mut t_max_y = if step_y != 0 {
            (boundary(iy, step_y, self.origin.y) - a.y) / d.y
        } else {
            T::infinity()
        };
        let t_delta_x = if step_x != 0 { res / d.x.abs() } else { T::infinity() };
        let t_delta_y = if step_y != 0 { res / d.y.abs() } else { T::infinity() };
        let corner_eps = T::lit(1e-9);
        let max_steps = ((ex - ix).abs() + (ey - iy).abs() + 2) as usize * 2;
        let mut cells = Vec::with_capacity(max_steps);
        let push = |cells: &mut Vec<(i64, i64)>, x: i64, y: i64| {
            if self.in_bounds(x, y) {
                cells.push((x, y));
            }
        };
        push(&mut cells, ix, iy);
        for _ in 0..max_steps {
            if (ix, iy) == (ex, ey) {
                break;
            }
            if t_max_x > T::one() && t_max_y > T::one() {
                break;
            }
            if (t_max_x - t_max_y).abs() <= corner_eps {
                push(&mut cells, ix + step_x, iy);
                push(&mut cells, ix, iy + step_y);
                ix += step_x;
                iy += step_y;
                t_max_x += t_delta_x;
                t_max_y += t_delta_y;
            } else if t_max_x < t_max_y {
                ix += step_x;
                t_max_x += t_delta_x;
            } else {
                iy += step_y;
                t_max_y += t_delta_y;
            }
            push(&mut cells, ix, iy);
        }
        cells
    }

    /// Line of sight between two in-bounds points.
    pub fn visibility(&self, a: Vec2<T>, b: Vec2<T>) -> Result<Visibility<T>, GridError> {
        for p in [a, b] {
            if !self.contains_point(p) {
                return Err(GridError::OutOfBounds {
                    x: p.x.to_f64_lossy(),
                    y: p.y.to_f64_lossy(),
                });
            }
        }
        Ok(self.first_blocked(a, b))
    }

    /// Like [`visibility`](Self::visibility) without the bounds check;
    /// out-of-grid portions of the segment are ignored.
    pub fn first_blocked(&self, a: Vec2<T>, b: Vec2<T>) -> Visibility<T> {
        for (ix, iy) in self.traverse(a, b) {
            if self.is_occupied(ix as usize, iy as usize) {
                return Visibility::Blocked(self.cell_center(ix, iy));
            }
        }
        Visibility::Visible
    }

    /// Like [`first_blocked`](Self::first_blocked), but occupied cells
    /// touched before the segment first reaches a free cell are ignored, so a
    /// segment starting inside an obstacle may leave it.
    pub fn first_blocked_leaving(&self, a: Vec2<T>, b: Vec2<T>) -> Visibility<T> {
        let mut escaped = false;
        for (ix, iy) in self.traverse(a, b) {
            let occupied = self.is_occupied(ix as usize, iy as usize);
            if !occupied {
                escaped = true;
            } else if escaped {
                return Visibility::Blocked(self.cell_center(ix, iy));
            }
        }
        Visibility::Visible
    }

    pub fn is_visible(&self, a: Vec2<T>, b: Vec2<T>) -> bool {
        self.first_blocked(a, b).is_visible()
    }
}
