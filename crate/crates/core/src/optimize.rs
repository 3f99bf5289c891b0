//! Back-end trajectory optimization: swept-volume aware SE(2) costs, residual
//! tracking costs for open regions, and an L-BFGS solver over MINCO waypoints
//! and piece durations.

use thiserror::Error;

use crate::geometry::{Aabb, Vec2};
use crate::gridmap::OccupancyGrid;
use crate::minco::{Boundary, Minco, MincoError, Trajectory};
use crate::scalar::Scalar;
use crate::shape::RobotShape;
use crate::sweep::{continuous_check, CollisionReport, SweepContext, SweepParams};

type Point = Vec2<f64>;
type Grid = OccupancyGrid<f64>;
type Traj = Trajectory<f64>;

/// Quadrature nodes per piece for the dynamics and residual integrals.
pub const QUADRATURE_NODES: usize = 16;

/// Obstacle points kept for the safety term of one sub-problem.
pub const MAX_SAFETY_POINTS: usize = 512;

/// C²-smooth ramp: 0 below zero, cubic blend on `(0, μ)`, `x - μ/2` above.
pub fn smoothing(x: f64, mu: f64) -> f64 {
    smoothing_with_derivative(x, mu).0
}

/// [`smoothing`] and its first derivative.
pub fn smoothing_with_derivative(x: f64, mu: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x < mu {
        let r = x / mu;
        ((mu - x / 2.0) * r * r * r, r * r * (3.0 - 2.0 * r))
    } else {
        (x - mu / 2.0, 1.0)
    }
}

/// Maps an unconstrained variable to a positive duration, C² at zero.
pub fn duration_from_tau(tau: f64) -> f64 {
    if tau > 0.0 {
        (tau / 2.0 + 1.0) * tau + 1.0
    } else {
        1.0 / ((tau / 2.0 - 1.0) * tau + 1.0)
    }
}

pub fn duration_derivative(tau: f64) -> f64 {
    if tau > 0.0 {
        tau + 1.0
    } else {
        let den = (tau / 2.0 - 1.0) * tau + 1.0;
        (1.0 - tau) / (den * den)
    }
}

/// Inverse of [`duration_from_tau`].
pub fn tau_from_duration(t: f64) -> f64 {
    assert!(t > 0.0, "duration must be positive");
    if t >= 1.0 {
        (2.0 * t - 1.0).sqrt() - 1.0
    } else {
        1.0 - (2.0 / t - 1.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub smoothness: f64,
    pub time: f64,
    pub safety: f64,
    pub dynamics: f64,
    pub position: f64,
    pub rotation: f64,
    /// Width of the smoothing ramp.
    pub mu: f64,
    /// Clearance the safety term asks for (m).
    pub d_safe: f64,
    pub v_max: f64,
    pub omega_max: f64,
}

impl Weights {
    pub fn for_resolution(resolution: f64) -> Self {
        Self {
            d_safe: resolution,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OptError> {
        let all = [
            self.smoothness,
            self.time,
            self.safety,
            self.dynamics,
            self.position,
            self.rotation,
            self.d_safe,
        ];
        if all.iter().any(|w| !(*w >= 0.0)) || !(self.mu > 0.0) || !(self.v_max > 0.0) || !(self.omega_max > 0.0) {
            return Err(OptError::InvalidWeights);
        }
        Ok(())
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            smoothness: 1.0,
            time: 20.0,
            safety: 1e4,
            dynamics: 1e3,
            position: 1e3,
            rotation: 1e3,
            mu: 0.01,
            d_safe: 0.1,
            v_max: 1.0,
            omega_max: 2.0,
        }
    }
}

/// Unweighted cost terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostTerms {
    pub smoothness: f64,
    pub time: f64,
    pub safety: f64,
    pub dynamics: f64,
    pub position: f64,
    pub rotation: f64,
}

/// Weighted cost with its partial derivatives in the coefficient layout of
/// [`Trajectory::coeffs`] and with respect to the piece durations.
#[derive(Debug, Clone, PartialEq)]
pub struct CostEval {
    pub cost: f64,
    pub terms: CostTerms,
    pub grad_coeffs: Vec<f64>,
    pub grad_durations: Vec<f64>,
}

impl CostEval {
    fn new(traj: &Traj) -> Self {
        Self {
            cost: 0.0,
            terms: CostTerms::default(),
            grad_coeffs: vec![0.0; traj.coeffs().len()],
            grad_durations: vec![0.0; traj.num_pieces()],
        }
    }
}

fn add_effort_and_time(traj: &Traj, w: &Weights, out: &mut CostEval) {
    let jm = traj.control_effort();
    let (gc, gt) = traj.control_effort_partials();
    out.terms.smoothness = jm;
    out.terms.time = traj.total_duration();
    out.cost += w.smoothness * jm + w.time * out.terms.time;
    for (o, g) in out.grad_coeffs.iter_mut().zip(gc) {
        *o += w.smoothness * g;
    }
    for (o, g) in out.grad_durations.iter_mut().zip(gt) {
        *o += w.smoothness * g + w.time;
    }
}

/// `Σ_j c_j j^(order) s^(j-order)` basis row for one derivative order.
fn basis(s: f64, order: usize) -> [f64; 6] {
    let mut b = [0.0; 6];
    for (j, slot) in b.iter_mut().enumerate().skip(order) {
        let mut f = 1.0;
        for k in 0..order {
            f *= (j - k) as f64;
        }
        *slot = f * s.powi((j - order) as i32);
    }
    b
}

fn add_coeff_grad(out: &mut CostEval, piece: usize, d: usize, row: &[f64; 6], scale: f64) {
    for (j, b) in row.iter().enumerate() {
        out.grad_coeffs[(6 * piece + j) * 3 + d] += scale * b;
    }
}

fn node_fraction(k: usize) -> f64 {
    (k as f64 + 0.5) / QUADRATURE_NODES as f64
}

/// `∫ L(‖v‖² - v_max²) + L(ω² - ω_max²) dt` by midpoint quadrature.
fn add_dynamics(traj: &Traj, w: &Weights, out: &mut CostEval) {
    if w.dynamics == 0.0 {
        return;
    }
    let mut total = 0.0;
    for i in 0..traj.num_pieces() {
        let t = traj.durations()[i];
        let h = t / QUADRATURE_NODES as f64;
        for k in 0..QUADRATURE_NODES {
            let sig = node_fraction(k);
            let s = sig * t;
            let v = traj.piece_eval(i, s, 1);
            let a = traj.piece_eval(i, s, 2);
            let b1 = basis(s, 1);
            let (pv, dv) = smoothing_with_derivative(v[0] * v[0] + v[1] * v[1] - w.v_max * w.v_max, w.mu);
            let (pw, dw) = smoothing_with_derivative(v[2] * v[2] - w.omega_max * w.omega_max, w.mu);
            total += h * (pv + pw);
            let scale = w.dynamics * h;
            if dv != 0.0 {
                add_coeff_grad(out, i, 0, &b1, scale * dv * 2.0 * v[0]);
                add_coeff_grad(out, i, 1, &b1, scale * dv * 2.0 * v[1]);
            }
            if dw != 0.0 {
                add_coeff_grad(out, i, 2, &b1, scale * dw * 2.0 * v[2]);
            }
            // Node position s = σT and weight h = T/K both move with T.
            let ds = dv * 2.0 * (v[0] * a[0] + v[1] * a[1]) + dw * 2.0 * v[2] * a[2];
            out.grad_durations[i] += w.dynamics * ((pv + pw) / QUADRATURE_NODES as f64 + h * ds * sig);
        }
    }
    out.terms.dynamics = total;
    out.cost += w.dynamics * total;
}

/// Sum over obstacle points of `L(d_safe - swept_sdf)`. The gradient flows
/// through the pose at the minimizing time, which is held fixed.
fn add_safety(traj: &Traj, w: &Weights, shape: &RobotShape<f64>, obstacles: &[Point], sweep: SweepParams<f64>, out: &mut CostEval) {
    if w.safety == 0.0 || obstacles.is_empty() {
        return;
    }
    let ctx = SweepContext::new(traj, shape, sweep);
    let total_t = traj.total_duration();
    let last = traj.num_pieces() - 1;
    let mut total = 0.0;
    for &x in obstacles {
        let r = ctx.query_window(x, 0.0, total_t, Some(w.d_safe));
        if r.value >= w.d_safe {
            continue;
        }
        let (p, dp) = smoothing_with_derivative(w.d_safe - r.value, w.mu);
        total += p;
        if dp == 0.0 {
            continue;
        }
        let (i, s) = traj.locate(r.t_star);
        let pose = traj.piece_eval(i, s, 0);
        let (c, sn) = (pose[2].cos(), pose[2].sin());
        let rel = x - Point::new(pose[0], pose[1]);
        let q = Point::new(c * rel.x + sn * rel.y, -sn * rel.x + c * rel.y);
        let (_, g) = shape.body_sdf_with_gradient(q);
        // ∂f/∂pos = -R ∇sdf, ∂f/∂yaw = ∇sdf · (q_y, -q_x).
        let g_pos = Point::new(-(c * g.x - sn * g.y), -(sn * g.x + c * g.y));
        let g_yaw = g.x * q.y - g.y * q.x;
        let scale = -w.safety * dp;
        let b0 = basis(s, 0);
        add_coeff_grad(out, i, 0, &b0, scale * g_pos.x);
        add_coeff_grad(out, i, 1, &b0, scale * g_pos.y);
        add_coeff_grad(out, i, 2, &b0, scale * g_yaw);
        if i == last && s >= traj.durations()[last] * (1.0 - 1e-12) {
            // Minimum at the final instant: lengthening the last piece
            // extends the search domain.
            let v = traj.piece_eval(i, s, 1);
            let df = g_pos.x * v[0] + g_pos.y * v[1] + g_yaw * v[2];
            if df < 0.0 {
                out.grad_durations[i] += scale * df;
            }
        }
    }
    out.terms.safety = total;
    out.cost += w.safety * total;
}

/// Cost of an SE(2) trajectory: smoothness, total time, swept-volume safety
/// against `obstacles` and dynamic limits.
pub fn se2_cost(traj: &Traj, w: &Weights, shape: &RobotShape<f64>, obstacles: &[Point], sweep: SweepParams<f64>) -> CostEval {
    assert_eq!(traj.dim(), 3, "SE(2) cost needs x, y, yaw");
    let mut out = CostEval::new(traj);
    add_effort_and_time(traj, w, &mut out);
    add_dynamics(traj, w, &mut out);
    add_safety(traj, w, shape, obstacles, sweep, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub position: Point,
    /// Unwrapped yaw (radians).
    pub yaw: f64,
}

/// Anchors assigned to the quadrature nodes of each piece. Anchor times are
/// arc-length fractions inside their piece, so the node-to-anchor map does not
/// change when durations do.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorTrack {
    nodes: Vec<[Anchor; QUADRATURE_NODES]>,
}

impl AnchorTrack {
    /// `breaks` are anchor indices of the piece boundaries, starting at 0 and
    /// ending at `anchors.len() - 1`.
    pub fn new(anchors: &[Anchor], breaks: &[usize]) -> Self {
        let mut nodes = Vec::with_capacity(breaks.len().saturating_sub(1));
        for w in breaks.windows(2) {
            let slice = &anchors[w[0]..=w[1]];
            let mut cum = vec![0.0];
            for p in slice.windows(2) {
                let l = cum.last().unwrap() + p[0].position.distance(p[1].position);
                cum.push(l);
            }
            let total = *cum.last().unwrap();
            let n = slice.len() - 1;
            let frac: Vec<f64> = cum
                .iter()
                .enumerate()
                .map(|(k, &c)| if total > 1e-12 { c / total } else { k as f64 / n.max(1) as f64 })
                .collect();
            let mut row = [slice[0]; QUADRATURE_NODES];
            for (k, slot) in row.iter_mut().enumerate() {
                let sig = node_fraction(k);
                let best = frac
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - sig).abs().partial_cmp(&(b.1 - sig).abs()).unwrap())
                    .map(|(j, _)| j)
                    .unwrap();
                *slot = slice[best];
            }
            nodes.push(row);
        }
        Self { nodes }
    }

    pub fn num_pieces(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_anchor(&self, piece: usize, node: usize) -> Anchor {
        self.nodes[piece][node]
    }
}

/// `∫ L(‖p - p_i‖²) dt` and `∫ L(‖R⁻¹R_i - I‖²_F) dt` with
/// `‖R⁻¹R_i - I‖²_F = 4(1 - cos(θ - θ_i))`.
fn add_residuals(traj: &Traj, w: &Weights, track: &AnchorTrack, out: &mut CostEval) {
    assert_eq!(track.num_pieces(), traj.num_pieces(), "anchor track does not match the trajectory");
    let mut gp = 0.0;
    let mut gr = 0.0;
    for i in 0..traj.num_pieces() {
        let t = traj.durations()[i];
        let h = t / QUADRATURE_NODES as f64;
        for k in 0..QUADRATURE_NODES {
            let sig = node_fraction(k);
            let s = sig * t;
            let a = track.node_anchor(i, k);
            let p = traj.piece_eval(i, s, 0);
            let v = traj.piece_eval(i, s, 1);
            let b0 = basis(s, 0);
            let ex = p[0] - a.position.x;
            let ey = p[1] - a.position.y;
            let (lp, dlp) = smoothing_with_derivative(ex * ex + ey * ey, w.mu);
            let dth = p[2] - a.yaw;
            let (lr, dlr) = smoothing_with_derivative(4.0 * (1.0 - dth.cos()), w.mu);
            gp += h * lp;
            gr += h * lr;
            let sp = w.position * h * dlp;
            let sr = w.rotation * h * dlr;
            if sp != 0.0 {
                add_coeff_grad(out, i, 0, &b0, sp * 2.0 * ex);
                add_coeff_grad(out, i, 1, &b0, sp * 2.0 * ey);
            }
            if sr != 0.0 {
                add_coeff_grad(out, i, 2, &b0, sr * 4.0 * dth.sin());
            }
            let k_inv = 1.0 / QUADRATURE_NODES as f64;
            out.grad_durations[i] += w.position * (lp * k_inv + h * dlp * 2.0 * (ex * v[0] + ey * v[1]) * sig)
                + w.rotation * (lr * k_inv + h * dlr * 4.0 * dth.sin() * v[2] * sig);
        }
    }
    out.terms.position = gp;
    out.terms.rotation = gr;
    out.cost += w.position * gp + w.rotation * gr;
}

/// Cost of an open-region trajectory: smoothness, total time and residuals
/// to the anchor states.
pub fn r2_cost(traj: &Traj, w: &Weights, track: &AnchorTrack) -> CostEval {
    assert_eq!(traj.dim(), 3, "residual cost needs x, y, yaw");
    let mut out = CostEval::new(traj);
    add_effort_and_time(traj, w, &mut out);
    add_residuals(traj, w, track, &mut out);
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum OptError {
    #[error("sub-problem needs at least two states")]
    TooFewStates,
    #[error("all states of the sub-problem coincide")]
    Degenerate,
    #[error("weights must be non-negative and μ, v_max, ω_max positive")]
    InvalidWeights,
    #[error(transparent)]
    Minco(#[from] MincoError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub max_iterations: usize,
    /// Stop when the gradient infinity norm falls below this.
    pub grad_tolerance: f64,
    /// Stop when an accepted step changes the cost by less than this fraction.
    pub rel_tolerance: f64,
    pub memory: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            grad_tolerance: 1e-5,
            rel_tolerance: 1e-8,
            memory: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub x: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Costs after each accepted step, starting with the initial cost.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Limited-memory BFGS with Armijo backtracking. `f` returns `None` where the
/// objective is undefined; such trial points are rejected by the line search.
pub fn lbfgs<F>(mut f: F, x0: Vec<f64>, params: &SolverParams) -> Option<SolverResult>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let (mut fx, mut g) = f(&x0)?;
    let mut x = x0;
    let mut history = vec![fx];
    let mut mem: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iterations {
        if inf_norm(&g) < params.grad_tolerance {
            converged = true;
            break;
        }
        // Two-loop recursion.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = mem.last() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        } else {
            let scale = 1.0 / inf_norm(&g).max(1.0);
            d.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            mem.clear();
            let scale = 1.0 / inf_norm(&g).max(1.0);
            d = g.iter().map(|v| -v * scale).collect();
            slope = dot(&g, &d);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            if let Some((ft, gt)) = f(&trial) {
                if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((xn, fxn, gn)) = accepted else {
            if !mem.is_empty() {
                mem.clear();
                continue;
            }
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if mem.len() == params.memory {
                mem.remove(0);
            }
            mem.push((s, y, 1.0 / sy));
        }
        let change = (fx - fxn).abs();
        x = xn;
        g = gn;
        let prev = fx;
        fx = fxn;
        history.push(fx);
        if change <= params.rel_tolerance * prev.abs().max(1e-12) {
            converged = true;
            break;
        }
    }
    if !converged && inf_norm(&g) < params.grad_tolerance {
        converged = true;
    }
    Some(SolverResult {
        x,
        cost: fx,
        iterations,
        converged,
        history,
    })
}

/// A chain of anchors with fixed boundary derivatives, split into pieces at
/// every `stride`-th anchor. Interior piece boundaries are free waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineProblem {
    pub anchors: Vec<Anchor>,
    /// Velocity and acceleration at the first anchor (x, y, yaw).
    pub start_rates: ([f64; 3], [f64; 3]),
    pub end_rates: ([f64; 3], [f64; 3]),
    pub stride: usize,
}

impl SplineProblem {
    pub fn at_rest(anchors: Vec<Anchor>, stride: usize) -> Self {
        Self {
            anchors,
            start_rates: ([0.0; 3], [0.0; 3]),
            end_rates: ([0.0; 3], [0.0; 3]),
            stride,
        }
    }

    fn check(&self) -> Result<(), OptError> {
        if self.anchors.len() < 2 {
            return Err(OptError::TooFewStates);
        }
        let a0 = self.anchors[0];
        if self
            .anchors
            .iter()
            .all(|a| a.position.distance(a0.position) < 1e-9 && (a.yaw - a0.yaw).abs() < 1e-9)
        {
            return Err(OptError::Degenerate);
        }
        Ok(())
    }

    /// Anchor indices of the piece boundaries.
    pub fn breaks(&self) -> Vec<usize> {
        let n = self.anchors.len();
        let stride = self.stride.max(1);
        let mut out: Vec<usize> = (0..n - 1).step_by(stride).collect();
        // Avoid a very short last piece.
        if out.len() > 1 && n - 1 - out.last().unwrap() < stride.div_ceil(2) {
            out.pop();
        }
        out.push(n - 1);
        out
    }

    fn boundary(&self, a: Anchor, rates: ([f64; 3], [f64; 3])) -> Boundary<f64> {
        Boundary {
            pos: vec![a.position.x, a.position.y, a.yaw],
            vel: rates.0.to_vec(),
            acc: rates.1.to_vec(),
        }
    }

    /// Initial parameter vector: anchor waypoints followed by the duration
    /// variables, with durations from half the speed and yaw-rate limits.
    pub fn initial_params(&self, w: &Weights) -> Vec<f64> {
        let breaks = self.breaks();
        let mut x = Vec::new();
        for &b in &breaks[1..breaks.len() - 1] {
            let a = self.anchors[b];
            x.extend([a.position.x, a.position.y, a.yaw]);
        }
        for win in breaks.windows(2) {
            let slice = &self.anchors[win[0]..=win[1]];
            let len: f64 = slice.windows(2).map(|p| p[0].position.distance(p[1].position)).sum();
            let turn: f64 = slice.windows(2).map(|p| (p[1].yaw - p[0].yaw).abs()).sum();
            let t = (len / (w.v_max / 2.0)).max(turn / (w.omega_max / 2.0)).max(0.05);
            x.push(tau_from_duration(t));
        }
        x
    }

    pub fn num_pieces(&self) -> usize {
        self.breaks().len() - 1
    }

    /// Builds the MINCO spline for parameter vector `x`.
    pub fn build(&self, x: &[f64]) -> Result<Minco<f64>, MincoError> {
        let m = self.num_pieces();
        let nw = (m - 1) * 3;
        let durations: Vec<f64> = x[nw..].iter().map(|&t| duration_from_tau(t)).collect();
        let start = self.boundary(self.anchors[0], self.start_rates);
        let end = self.boundary(*self.anchors.last().unwrap(), self.end_rates);
        Minco::construct(&start, &end, &x[..nw], &durations)
    }

    /// Cost and parameter gradient for a cost defined on trajectories.
    pub fn evaluate<C>(&self, x: &[f64], cost: C) -> Option<(f64, Vec<f64>)>
    where
        C: Fn(&Traj) -> CostEval,
    {
        let minco = self.build(x).ok()?;
        let eval = cost(minco.trajectory());
        if !eval.cost.is_finite() {
            return None;
        }
        let pg = minco.gradients(&eval.grad_coeffs, &eval.grad_durations);
        let nw = pg.waypoints.len();
        let mut grad = pg.waypoints;
        grad.extend(pg.durations.iter().zip(&x[nw..]).map(|(g, &t)| g * duration_derivative(t)));
        Some((eval.cost, grad))
    }

    pub fn track(&self) -> AnchorTrack {
        AnchorTrack::new(&self.anchors, &self.breaks())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptOutcome {
    pub trajectory: Traj,
    pub converged: bool,
    pub terms: CostTerms,
    pub cost: f64,
    pub iterations: usize,
    /// Continuous check at zero margin; `None` when not checked.
    pub collision_free: Option<bool>,
    pub report: Option<CollisionReport<f64>>,
}

/// Keeps at most `cap` points by farthest-point sampling, starting from the
/// first point.
pub fn farthest_point_subsample(points: &[Point], cap: usize) -> Vec<Point> {
    if points.len() <= cap {
        return points.to_vec();
    }
    if cap == 0 {
        return Vec::new();
    }
    let mut chosen = vec![points[0]];
    let mut dist: Vec<f64> = points.iter().map(|p| p.distance(points[0])).collect();
    while chosen.len() < cap {
        let (idx, _) = dist
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        let p = points[idx];
        chosen.push(p);
        for (d, q) in dist.iter_mut().zip(points) {
            *d = d.min(q.distance(p));
        }
    }
    chosen
}

fn safety_points(grid: &Grid, region: Aabb<f64>) -> Vec<Point> {
    farthest_point_subsample(&grid.obstacles_in(&region).points, MAX_SAFETY_POINTS)
}

/// Optimizes a high-risk sub-problem with the swept-volume safety term and
/// certifies the result with a zero-margin continuous check.
pub fn se2_optimize(
    problem: &SplineProblem,
    w: &Weights,
    shape: &RobotShape<f64>,
    grid: &Grid,
    solver: &SolverParams,
) -> Result<OptOutcome, OptError> {
    w.validate()?;
    problem.check()?;
    let check_params = SweepParams::for_resolution(grid.resolution());
    // The cost only needs the minimizing time approximately; wild line-search
    // trials would otherwise hit the full sampling budget.
    let sweep = SweepParams {
        time_tolerance: 1e-6,
        max_evaluations: 400,
        ..check_params
    };
    let reach = shape.circumradius() + w.d_safe + 2.0 * grid.resolution();
    let anchor_box = Aabb::from_points(problem.anchors.iter().map(|a| a.position)).expanded(reach);
    let mut obstacles = safety_points(grid, anchor_box);
    let mut x = problem.initial_params(w);
    problem.build(&x)?;
    let mut iterations = 0;
    let mut converged = false;
    // A second round picks up obstacles near where the trajectory moved.
    for round in 0..2 {
        let res = lbfgs(
            |p| problem.evaluate(p, |t| se2_cost(t, w, shape, &obstacles, sweep)),
            x.clone(),
            solver,
        );
        if let Some(r) = res {
            x = r.x;
            iterations += r.iterations;
            converged = r.converged;
        }
        if round == 1 {
            break;
        }
        let traj = problem.build(&x)?.into_trajectory();
        let ctx = SweepContext::new(&traj, shape, sweep);
        let region = ctx.position_bounds().expanded(reach);
        let mut wider = anchor_box;
        wider.include(region.min);
        wider.include(region.max);
        let next = safety_points(grid, wider);
        if next == obstacles {
            break;
        }
        obstacles = next;
    }
    let traj = problem.build(&x)?.into_trajectory();
    let eval = se2_cost(&traj, w, shape, &obstacles, sweep);
    let report = continuous_check(&traj, shape, grid, 0.0, check_params);
    Ok(OptOutcome {
        converged,
        terms: eval.terms,
        cost: eval.cost,
        iterations,
        collision_free: Some(report.is_clear()),
        report: Some(report),
        trajectory: traj,
    })
}

/// Optimizes a low-risk sub-problem by tracking its anchors; no safety term.
pub fn r2_optimize(problem: &SplineProblem, w: &Weights, solver: &SolverParams) -> Result<OptOutcome, OptError> {
    w.validate()?;
    problem.check()?;
    let track = problem.track();
    let x0 = problem.initial_params(w);
    problem.build(&x0)?;
    let res = lbfgs(|p| problem.evaluate(p, |t| r2_cost(t, w, &track)), x0.clone(), solver);
    let (x, iterations, converged) = match res {
        Some(r) => (r.x, r.iterations, r.converged),
        None => (x0, 0, false),
    };
    let traj = problem.build(&x)?.into_trajectory();
    let eval = r2_cost(&traj, w, &track);
    Ok(OptOutcome {
        converged,
        terms: eval.terms,
        cost: eval.cost,
        iterations,
        collision_free: None,
        report: None,
        trajectory: traj,
    })
}

/// Unwraps `yaw` to the representative closest to `reference`.
pub fn unwrap_near(yaw: f64, reference: f64) -> f64 {
    reference + (yaw - reference).wrap_angle()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minco::construct;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        num / den.max(1e-9)
    }

    fn fd_coeffs(traj: &Traj, f: &dyn Fn(&Traj) -> f64) -> (Vec<f64>, Vec<f64>) {
        let h = 1e-6;
        let mut gc = Vec::new();
        for k in 0..traj.coeffs().len() {
            let mut c = traj.coeffs().to_vec();
            c[k] += h;
            let up = f(&Traj::from_parts(3, traj.durations().to_vec(), c.clone()).unwrap());
            c[k] -= 2.0 * h;
            let dn = f(&Traj::from_parts(3, traj.durations().to_vec(), c).unwrap());
            gc.push((up - dn) / (2.0 * h));
        }
        let mut gt = Vec::new();
        for i in 0..traj.num_pieces() {
            let mut t = traj.durations().to_vec();
            t[i] += h;
            let up = f(&Traj::from_parts(3, t.clone(), traj.coeffs().to_vec()).unwrap());
            t[i] -= 2.0 * h;
            let dn = f(&Traj::from_parts(3, t, traj.coeffs().to_vec()).unwrap());
            gt.push((up - dn) / (2.0 * h));
        }
        (gc, gt)
    }

    fn random_traj(rng: &mut ChaCha8Rng, pieces: usize, scale: f64) -> Traj {
        let mut v = |n: usize, s: f64| (0..n).map(|_| rng.gen_range(-s..s)).collect::<Vec<f64>>();
        let start = Boundary {
            pos: vec![0.0, 0.0, 0.0],
            vel: v(3, 0.3),
            acc: v(3, 0.3),
        };
        let end = Boundary {
            pos: vec![scale, 0.2, 0.8],
            vel: v(3, 0.3),
            acc: v(3, 0.3),
        };
        let mut wps = Vec::new();
        for i in 1..pieces {
            let f = i as f64 / pieces as f64;
            wps.extend([scale * f + v(1, 0.1)[0], v(1, 0.2)[0], 0.8 * f + v(1, 0.3)[0]]);
        }
        let times: Vec<f64> = v(pieces, 0.3).iter().map(|d| 0.8 + d).collect();
        construct(&start, &end, &wps, &times).unwrap()
    }

    #[test]
    fn smoothing_values() {
        let mu = 0.01;
        assert_eq!(smoothing(-1.0, mu), 0.0);
        assert!((smoothing(mu, mu) - mu / 2.0).abs() < 1e-15);
        let below = (mu - mu / 2.0) * 1.0;
        assert!((below - mu / 2.0).abs() < 1e-15);
        assert!((smoothing(2.0, mu) - (2.0 - mu / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn smoothing_is_c2_at_seams() {
        let mu = 0.01;
        let h = 1e-3;
        // Five-point one-sided second difference: exact on the quartic blend
        // and on the linear and zero branches.
        let one_sided = |x0: f64, dir: f64| {
            let f = |k: f64| smoothing(x0 + dir * k * h, mu);
            (35.0 * f(0.0) - 104.0 * f(1.0) + 114.0 * f(2.0) - 56.0 * f(3.0) + 11.0 * f(4.0)) / (12.0 * h * h)
        };
        for seam in [0.0, mu] {
            let left = one_sided(seam, -1.0);
            let right = one_sided(seam, 1.0);
            assert!((left - right).abs() < 1e-6, "seam {seam}: {left} vs {right}");
        }
        let d1 = |x: f64| (smoothing(x + 1e-7, mu) - smoothing(x - 1e-7, mu)) / 2e-7;
        for k in 1..50 {
            let x = -0.005 + 0.0004 * k as f64;
            assert!((d1(x) - smoothing_with_derivative(x, mu).1).abs() < 1e-6);
        }
    }

    #[test]
    fn duration_map_round_trip() {
        for &t in &[0.01, 0.3, 1.0, 2.5, 40.0] {
            assert!((duration_from_tau(tau_from_duration(t)) - t).abs() < 1e-12 * t.max(1.0));
        }
        for &tau in &[-3.0, -0.5, -1e-9, 0.0, 1e-9, 0.7, 4.0] {
            let h = 1e-6;
            let fd = (duration_from_tau(tau + h) - duration_from_tau(tau - h)) / (2.0 * h);
            assert!((fd - duration_derivative(tau)).abs() < 1e-6);
            assert!(duration_from_tau(tau) > 0.0);
        }
    }

    #[test]
    fn se2_cost_free_space_is_effort_plus_time() {
        let start = Boundary::rest(vec![0.0, 0.0, 0.0]);
        let end = Boundary::rest(vec![1.0, 0.0, 0.0]);
        let traj = construct(&start, &end, &[], &[2.0]).unwrap();
        let shape = RobotShape::rectangle(0.4, 0.2).unwrap();
        let w = Weights {
            v_max: 5.0,
            omega_max: 5.0,
            ..Weights::default()
        };
        let e = se2_cost(&traj, &w, &shape, &[], SweepParams::for_resolution(0.1));
        assert_eq!(e.terms.safety, 0.0);
        assert_eq!(e.terms.dynamics, 0.0);
        let expected = 720.0 / 32.0 + 20.0 * 2.0;
        assert!((e.cost - expected).abs() < 1e-9);
        // A far obstacle point changes nothing.
        let far = se2_cost(&traj, &w, &shape, &[Point::new(0.5, 5.0)], SweepParams::for_resolution(0.1));
        assert_eq!(far.cost, e.cost);
        assert_eq!(far.grad_coeffs, e.grad_coeffs);
    }

    #[test]
    fn se2_cost_gradients_match_finite_differences() {
        let shape = RobotShape::rectangle(0.5, 0.2).unwrap();
        let sweep = SweepParams::for_resolution(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..20 {
            let traj = random_traj(&mut rng, 2, 1.0);
            let w = Weights {
                d_safe: 0.4,
                v_max: 0.8,
                omega_max: 0.8,
                ..Weights::default()
            };
            let t_mid = traj.total_duration() * rng.gen_range(0.3..0.7);
            let p = traj.eval(t_mid, 0).unwrap();
            let x = Point::new(p[0] + rng.gen_range(-0.1..0.1), p[1] + rng.gen_range(0.3..0.4));
            let e = se2_cost(&traj, &w, &shape, &[x], sweep);
            if e.terms.safety == 0.0 {
                continue;
            }
            checked += 1;
            let (gc, gt) = fd_coeffs(&traj, &|t| se2_cost(t, &w, &shape, &[x], sweep).cost);
            assert!(rel_err(&e.grad_coeffs, &gc) < 1e-3, "coeff err {}", rel_err(&e.grad_coeffs, &gc));
            assert!(rel_err(&e.grad_durations, &gt) < 1e-3, "time err {}", rel_err(&e.grad_durations, &gt));
        }
        assert!(checked >= 10);
    }

    fn anchors_line(n: usize, len: f64, yaw: f64) -> Vec<Anchor> {
        (0..n)
            .map(|i| Anchor {
                position: Point::new(len * i as f64 / (n - 1) as f64, 0.0),
                yaw,
            })
            .collect()
    }

    #[test]
    fn r2_cost_zero_residual_on_exact_track() {
        let still = vec![
            Anchor {
                position: Point::new(0.5, 0.5),
                yaw: 0.4,
            };
            3
        ];
        let traj = construct(
            &Boundary::rest(vec![0.5, 0.5, 0.4]),
            &Boundary::rest(vec![0.5, 0.5, 0.4]),
            &[0.5, 0.5, 0.4],
            &[1.0, 1.0],
        )
        .unwrap();
        let e = r2_cost(&traj, &Weights::default(), &AnchorTrack::new(&still, &[0, 1, 2]));
        assert_eq!(e.terms.position, 0.0);
        assert_eq!(e.terms.rotation, 0.0);

        // Constant-velocity line through dense anchors: nodes sit at most a
        // half spacing (0.025 m) from their anchor, inside the smoothing blend.
        let anchors = anchors_line(21, 1.0, 0.3);
        let problem = SplineProblem {
            start_rates: ([0.5, 0.0, 0.0], [0.0; 3]),
            end_rates: ([0.5, 0.0, 0.0], [0.0; 3]),
            ..SplineProblem::at_rest(anchors.clone(), 4)
        };
        let breaks = problem.breaks();
        let x: Vec<f64> = breaks[1..breaks.len() - 1]
            .iter()
            .flat_map(|&b| [anchors[b].position.x, 0.0, 0.3])
            .chain(std::iter::repeat(tau_from_duration(0.4)).take(breaks.len() - 1))
            .collect();
        let traj = problem.build(&x).unwrap().into_trajectory();
        let e = r2_cost(&traj, &Weights::default(), &problem.track());
        assert!(e.terms.rotation.abs() < 1e-12);
        let bound = smoothing(0.025f64.powi(2), 0.01) * traj.total_duration();
        assert!(e.terms.position <= bound + 1e-15, "{} > {}", e.terms.position, bound);
    }

    #[test]
    fn rotation_residual_at_half_turn() {
        let anchors = vec![
            Anchor {
                position: Point::zero(),
                yaw: 0.0,
            },
            Anchor {
                position: Point::new(1.0, 0.0),
                yaw: std::f64::consts::PI,
            },
        ];
        let traj = construct(
            &Boundary::rest(vec![0.0, 0.0, std::f64::consts::PI]),
            &Boundary::rest(vec![0.0, 0.0, std::f64::consts::PI]),
            &[],
            &[1.0],
        )
        .unwrap();
        let track = AnchorTrack::new(&anchors, &[0, 1]);
        let w = Weights {
            position: 0.0,
            ..Weights::default()
        };
        let e = r2_cost(&traj, &w, &track);
        // Nodes mapped to the first anchor see a yaw error of π: Frobenius term 8.
        let first_half = (0..QUADRATURE_NODES).filter(|&k| track.node_anchor(0, k).yaw == 0.0).count();
        let expected = first_half as f64 / QUADRATURE_NODES as f64 * smoothing(8.0, w.mu);
        assert!((e.terms.rotation - expected).abs() < 1e-12);
        assert!((4.0 * (1.0 - std::f64::consts::PI.cos()) - 8.0).abs() < 1e-15);
    }

    #[test]
    fn r2_cost_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let traj = random_traj(&mut rng, 3, 1.5);
            let anchors: Vec<Anchor> = (0..10)
                .map(|i| Anchor {
                    position: Point::new(0.15 * i as f64 + rng.gen_range(-0.1..0.1), rng.gen_range(-0.2..0.2)),
                    yaw: rng.gen_range(-1.0..1.0),
                })
                .collect();
            let track = AnchorTrack::new(&anchors, &[0, 3, 6, 9]);
            let w = Weights::default();
            let e = r2_cost(&traj, &w, &track);
            let (gc, gt) = fd_coeffs(&traj, &|t| r2_cost(t, &w, &track).cost);
            assert!(rel_err(&e.grad_coeffs, &gc) < 1e-3);
            assert!(rel_err(&e.grad_durations, &gt) < 1e-3);
        }
    }

    #[test]
    fn parameter_gradients_match_finite_differences() {
        let shape = RobotShape::rectangle(0.5, 0.2).unwrap();
        let sweep = SweepParams::for_resolution(0.1);
        let anchors: Vec<Anchor> = (0..9)
            .map(|i| Anchor {
                position: Point::new(0.2 * i as f64, 0.05 * (i as f64 * 0.7).sin()),
                yaw: 0.1 * i as f64,
            })
            .collect();
        let problem = SplineProblem::at_rest(anchors, 2);
        let w = Weights {
            d_safe: 0.4,
            ..Weights::default()
        };
        let obstacles = [Point::new(0.8, 0.35), Point::new(1.1, -0.3)];
        let track = problem.track();
        let x0 = problem.initial_params(&w);
        type CostFn<'a> = Box<dyn Fn(&Traj) -> CostEval + 'a>;
        let costs: Vec<CostFn> = vec![
            Box::new(|t: &Traj| se2_cost(t, &w, &shape, &obstacles, sweep)),
            Box::new(|t: &Traj| r2_cost(t, &w, &track)),
        ];
        for cost in &costs {
            let (_, g) = problem.evaluate(&x0, cost).unwrap();
            let h = 1e-6;
            let fd: Vec<f64> = (0..x0.len())
                .map(|k| {
                    let mut xp = x0.clone();
                    xp[k] += h;
                    let up = problem.evaluate(&xp, cost).unwrap().0;
                    xp[k] -= 2.0 * h;
                    let dn = problem.evaluate(&xp, cost).unwrap().0;
                    (up - dn) / (2.0 * h)
                })
                .collect();
            assert!(rel_err(&g, &fd) < 1e-3, "param err {}", rel_err(&g, &fd));
        }
    }

    #[test]
    fn lbfgs_rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            Some((v, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]))
        };
        let params = SolverParams {
            max_iterations: 500,
            rel_tolerance: 0.0,
            ..SolverParams::default()
        };
        let r = lbfgs(f, vec![-1.2, 1.0], &params).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn r2_optimize_two_states_is_straight_min_jerk() {
        let anchors = anchors_line(2, 1.0, 0.0);
        let w = Weights::default();
        let out = r2_optimize(&SplineProblem::at_rest(anchors, 4), &w, &SolverParams::default()).unwrap();
        assert!(out.converged);
        let t = out.trajectory.total_duration();
        for k in 0..=20 {
            let p = out.trajectory.eval(t * k as f64 / 20.0, 0).unwrap();
            assert!(p[1].abs() < 1e-9 && p[2].abs() < 1e-9);
        }
        let mid = out.trajectory.eval(t / 2.0, 0).unwrap();
        assert!((mid[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn r2_optimize_tracks_l_shaped_anchors() {
        let mut anchors = Vec::new();
        for i in 0..=10 {
            anchors.push(Anchor {
                position: Point::new(0.1 * i as f64, 0.0),
                yaw: 0.0,
            });
        }
        for i in 1..=10 {
            anchors.push(Anchor {
                position: Point::new(1.0, 0.1 * i as f64),
                yaw: 0.0,
            });
        }
        let problem = SplineProblem::at_rest(anchors.clone(), 4);
        let w = Weights {
            position: 1e5,
            ..Weights::default()
        };
        let solver = SolverParams {
            max_iterations: 400,
            ..SolverParams::default()
        };
        let out = r2_optimize(&problem, &w, &solver).unwrap();
        let breaks = problem.breaks();
        let bp = out.trajectory.breakpoints();
        for (j, &b) in breaks.iter().enumerate() {
            let p = out.trajectory.eval(bp[j], 0).unwrap();
            let d = Point::new(p[0], p[1]).distance(anchors[b].position);
            assert!(d <= w.mu.sqrt() + 0.02, "anchor {b} off by {d}");
        }
    }

    #[test]
    fn r2_optimize_without_residuals_is_smoothness_time_optimum() {
        let anchors = vec![
            Anchor {
                position: Point::zero(),
                yaw: 0.0,
            },
            Anchor {
                position: Point::new(0.5, 0.8),
                yaw: 0.0,
            },
            Anchor {
                position: Point::new(2.0, 0.0),
                yaw: 0.0,
            },
        ];
        let w = Weights {
            position: 0.0,
            rotation: 0.0,
            ..Weights::default()
        };
        let solver = SolverParams {
            max_iterations: 500,
            ..SolverParams::default()
        };
        let out = r2_optimize(&SplineProblem::at_rest(anchors, 1), &w, &solver).unwrap();
        // Free waypoint: optimum is the single min-jerk line with
        // T = (3600 D² / λ_t)^(1/6).
        let d2 = 4.0;
        let t_opt = (3600.0 * d2 / w.time).powf(1.0 / 6.0);
        let j_opt = 720.0 * d2 / t_opt.powi(5) + w.time * t_opt;
        assert!((out.cost - j_opt).abs() < 1e-3 * j_opt, "{} vs {}", out.cost, j_opt);
        let mid = out.trajectory.eval(out.trajectory.total_duration() / 2.0, 0).unwrap();
        assert!(mid[1].abs() < 1e-2);
    }

    fn grid(w: usize, h: usize) -> Grid {
        Grid::new(w, h, 0.1, Point::zero()).unwrap()
    }

    fn fill(g: &mut Grid, x0: usize, x1: usize, y0: usize, y1: usize) {
        for x in x0..=x1 {
            for y in y0..=y1 {
                g.set_occupied(x, y, true);
            }
        }
    }

    #[test]
    fn se2_optimize_wide_corridor_close_to_free_optimum() {
        let shape = RobotShape::rectangle(0.4, 0.2).unwrap();
        let mut g = grid(40, 30);
        fill(&mut g, 0, 39, 0, 4);
        fill(&mut g, 0, 39, 25, 29);
        let anchors: Vec<Anchor> = (0..=20)
            .map(|i| Anchor {
                position: Point::new(0.5 + 0.15 * i as f64, 1.5),
                yaw: 0.0,
            })
            .collect();
        let problem = SplineProblem::at_rest(anchors, 2);
        let w = Weights {
            v_max: 10.0,
            omega_max: 10.0,
            ..Weights::for_resolution(0.1)
        };
        let solver = SolverParams::default();
        let walled = se2_optimize(&problem, &w, &shape, &g, &solver).unwrap();
        assert_eq!(walled.collision_free, Some(true));
        let d2 = 9.0;
        let t_opt = (3600.0 * d2 / w.time).powf(1.0 / 6.0);
        let j_opt = 720.0 * d2 / t_opt.powi(5);
        let jm = walled.trajectory.control_effort();
        assert!((jm - j_opt).abs() <= 0.1 * j_opt, "{jm} vs {j_opt}");
    }

    #[test]
    fn se2_optimize_reports_impassable_gap() {
        let shape = RobotShape::rectangle(0.6, 0.4).unwrap();
        let mut g = grid(40, 40);
        fill(&mut g, 0, 18, 20, 20);
        fill(&mut g, 21, 39, 20, 20);
        let anchors: Vec<Anchor> = (0..=20)
            .map(|i| Anchor {
                position: Point::new(1.95, 1.0 + 0.1 * i as f64),
                yaw: std::f64::consts::FRAC_PI_2,
            })
            .collect();
        let solver = SolverParams {
            max_iterations: 60,
            ..SolverParams::default()
        };
        let out = se2_optimize(&SplineProblem::at_rest(anchors, 2), &Weights::for_resolution(0.1), &shape, &g, &solver).unwrap();
        assert_eq!(out.collision_free, Some(false));
        assert!(!out.report.unwrap().is_clear());
    }

    #[test]
    fn degenerate_problems_are_rejected() {
        let a = Anchor {
            position: Point::new(1.0, 1.0),
            yaw: 0.0,
        };
        let w = Weights::default();
        assert_eq!(
            r2_optimize(&SplineProblem::at_rest(vec![a], 2), &w, &SolverParams::default()),
            Err(OptError::TooFewStates)
        );
        assert_eq!(
            r2_optimize(&SplineProblem::at_rest(vec![a, a, a], 2), &w, &SolverParams::default()),
            Err(OptError::Degenerate)
        );
    }

    #[test]
    fn farthest_point_subsample_spreads() {
        let pts: Vec<Point> = (0..100).map(|i| Point::new(i as f64, 0.0)).collect();
        let s = farthest_point_subsample(&pts, 3);
        assert_eq!(s, vec![Point::new(0.0, 0.0), Point::new(99.0, 0.0), Point::new(49.0, 0.0)]);
        assert_eq!(farthest_point_subsample(&pts[..5], 10).len(), 5);
    }

    #[test]
    fn unwrap_near_picks_closest() {
        let y = unwrap_near(-3.0, 3.0);
        assert!((y - (-3.0 + std::f64::consts::TAU)).abs() < 1e-12);
        assert_eq!(unwrap_near(0.2, 0.1), 0.2);
    }
}
