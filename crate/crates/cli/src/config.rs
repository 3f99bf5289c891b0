//! Run configuration documents (TOML).
//!
//! ```toml
//! map = "slit.map"
//! shape = "rect.shape"
//! seed = 3
//! render = true
//!
//! [start]
//! x = 0.6
//! y = 0.8
//! yaw = 0.0
//!
//! [goal]
//! x = 1.5
//! y = 3.2
//!
//! [planner]
//! max_candidates = 4
//!
//! [weights]
//! safety = 1e4
//! ```
//!
//! Relative paths are resolved against the directory holding the document.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use svplan::gridmap::GridError;
use svplan::pipeline::PlanConfig;
use svplan::shape::ShapeError;
use svplan::{Grid, Pose, Shape};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{path}: {source}")]
    Map { path: PathBuf, source: GridError },
    #[error("{path}: {source}")]
    Shape { path: PathBuf, source: ShapeError },
    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPose {
    x: f64,
    y: f64,
    #[serde(default)]
    yaw: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlannerSection {
    roadmap_samples: Option<usize>,
    narrow_run: Option<usize>,
    max_raw_paths: Option<usize>,
    max_path_vertices: Option<usize>,
    max_candidates: Option<usize>,
    n_orientations: Option<usize>,
    push_attempts: Option<usize>,
    search_range: Option<usize>,
    seg_max_depth: Option<usize>,
    risk_pad: Option<usize>,
    se2_stride: Option<usize>,
    r2_stride: Option<usize>,
    d_safe: Option<f64>,
    certify_margin: Option<f64>,
    se2_iterations: Option<usize>,
    r2_iterations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsSection {
    smoothness: Option<f64>,
    time: Option<f64>,
    safety: Option<f64>,
    dynamics: Option<f64>,
    position: Option<f64>,
    rotation: Option<f64>,
    mu: Option<f64>,
    v_max: Option<f64>,
    omega_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    map: PathBuf,
    shape: PathBuf,
    out: Option<PathBuf>,
    #[serde(default)]
    render: bool,
    #[serde(default)]
    seed: u64,
    start: RawPose,
    goal: RawPose,
    #[serde(default)]
    planner: PlannerSection,
    #[serde(default)]
    weights: WeightsSection,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: PathBuf,
    pub map_path: PathBuf,
    pub shape_path: PathBuf,
    pub grid: Grid,
    pub shape: Shape,
    pub start: Pose,
    pub goal: Pose,
    pub plan: PlanConfig,
    pub out_dir: PathBuf,
    pub render: bool,
    pub seed: u64,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn apply(plan: &mut PlanConfig, p: PlannerSection, w: WeightsSection) {
    set(&mut plan.roadmap_samples, p.roadmap_samples);
    set(&mut plan.narrow_run, p.narrow_run);
    set(&mut plan.max_raw_paths, p.max_raw_paths);
    set(&mut plan.max_path_vertices, p.max_path_vertices);
    set(&mut plan.max_candidates, p.max_candidates);
    set(&mut plan.n_orientations, p.n_orientations);
    set(&mut plan.push_attempts, p.push_attempts);
    set(&mut plan.search_range, p.search_range);
    set(&mut plan.seg_max_depth, p.seg_max_depth);
    set(&mut plan.risk_pad, p.risk_pad);
    set(&mut plan.se2_stride, p.se2_stride);
    set(&mut plan.r2_stride, p.r2_stride);
    set(&mut plan.certify_margin, p.certify_margin);
    set(&mut plan.se2_solver.max_iterations, p.se2_iterations);
    set(&mut plan.r2_solver.max_iterations, p.r2_iterations);
    if p.d_safe.is_some() {
        plan.d_safe = p.d_safe;
    }
    let wt = &mut plan.weights;
    set(&mut wt.smoothness, w.smoothness);
    set(&mut wt.time, w.time);
    set(&mut wt.safety, w.safety);
    set(&mut wt.dynamics, w.dynamics);
    set(&mut wt.position, w.position);
    set(&mut wt.rotation, w.rotation);
    set(&mut wt.mu, w.mu);
    set(&mut wt.v_max, w.v_max);
    set(&mut wt.omega_max, w.omega_max);
}

impl RunConfig {
    /// Reads the document, the map and the shape it references, and checks
    /// the planner settings.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = read(path)?;
        let raw: RawConfig = toml::from_str(&text).map_err(|source| ConfigError::Toml {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let map_path = base.join(&raw.map);
        let shape_path = base.join(&raw.shape);
        let grid = Grid::parse(&read(&map_path)?).map_err(|source| ConfigError::Map {
            path: map_path.clone(),
            source,
        })?;
        let shape = Shape::parse(&read(&shape_path)?).map_err(|source| ConfigError::Shape {
            path: shape_path.clone(),
            source,
        })?;
        let mut plan = PlanConfig {
            seed: raw.seed,
            ..PlanConfig::default()
        };
        apply(&mut plan, raw.planner, raw.weights);
        let invalid = |reason: String| ConfigError::Invalid {
            path: path.to_path_buf(),
            reason,
        };
        plan.validate().map_err(|e| invalid(e.to_string()))?;
        for (name, p) in [("start", &raw.start), ("goal", &raw.goal)] {
            if ![p.x, p.y, p.yaw].iter().all(|v| v.is_finite()) {
                return Err(invalid(format!("{name} pose is not finite")));
            }
        }
        Ok(Self {
            source: path.to_path_buf(),
            map_path,
            shape_path,
            grid,
            shape,
            start: Pose::new(raw.start.x, raw.start.y, raw.start.yaw),
            goal: Pose::new(raw.goal.x, raw.goal.y, raw.goal.yaw),
            plan,
            out_dir: base.join(raw.out.unwrap_or_else(|| PathBuf::from("out"))),
            render: raw.render,
            seed: raw.seed,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.plan.seed = seed;
        self
    }
}
