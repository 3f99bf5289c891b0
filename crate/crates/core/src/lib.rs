//! Whole-body SE(2) motion planning on occupancy grids.

pub mod geometry;
pub mod gridmap;
pub mod linalg;
pub mod minco;
pub mod optimize;
pub mod pipeline;
pub mod scalar;
pub mod sequence;
pub mod shape;
pub mod sweep;
pub mod topo;

pub use geometry::{Pose2, Vec2};
pub use scalar::Scalar;

/// Double precision occupancy grid.
pub type Grid = gridmap::OccupancyGrid<f64>;
/// Double precision robot polygon.
pub type Shape = shape::RobotShape<f64>;
/// Double precision body-frame distance field.
pub type Esdf = shape::BodyEsdf<f64>;
pub type Point = Vec2<f64>;
pub type Pose = Pose2<f64>;
/// Double precision piecewise quintic trajectory.
pub type Traj = minco::Trajectory<f64>;
