//! Minimum-jerk piecewise quintic trajectories (MINCO, s = 3).
//!
//! Coefficients of piece `i`, power `j` (of local time), dimension `d` live at
//! `coeffs[(6 * i + j) * dim + d]`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::linalg::{BandedMatrix, BandedSolver};
use crate::scalar::Scalar;

pub const N_COEFFS: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum MincoError {
    #[error("piece duration {index} is not positive ({value})")]
    NonPositiveDuration { index: usize, value: f64 },
    #[error("expected {expected} values for {what}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("time {t} outside [0, {total}]")]
    Domain { t: f64, total: f64 },
    #[error("derivative order {0} exceeds 5")]
    Order(usize),
    #[error("spline system is singular")]
    Singular,
    #[error("malformed trajectory document (line {line}): {reason}")]
    Malformed { line: usize, reason: String },
}

/// Position, velocity and acceleration at one end of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary<T> {
    pub pos: Vec<T>,
    pub vel: Vec<T>,
    pub acc: Vec<T>,
}

impl<T: Scalar> Boundary<T> {
    /// At rest at `pos`.
    pub fn rest(pos: Vec<T>) -> Self {
        let n = pos.len();
        Self {
            pos,
            vel: vec![T::zero(); n],
            acc: vec![T::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.pos.len()
    }

    fn row(&self, k: usize) -> &[T] {
        match k {
            0 => &self.pos,
            1 => &self.vel,
            _ => &self.acc,
        }
    }
}

/// Piecewise quintic polynomial in `dim` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    dim: usize,
    durations: Vec<T>,
    coeffs: Vec<T>,
}

/// Falling factorial `j! / (j - k)!`.
#[inline]
fn falling(j: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (j - i) as f64)
}

impl<T: Scalar> Trajectory<T> {
    pub fn from_parts(dim: usize, durations: Vec<T>, coeffs: Vec<T>) -> Result<Self, MincoError> {
        check_durations(&durations)?;
        let expected = durations.len() * N_COEFFS * dim;
        if coeffs.len() != expected {
            return Err(MincoError::Shape {
                what: "coefficients",
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self { dim, durations, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_pieces(&self) -> usize {
        self.durations.len()
    }

    pub fn durations(&self) -> &[T] {
        &self.durations
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    #[inline]
    pub fn coeff(&self, piece: usize, power: usize, d: usize) -> T {
        self.coeffs[(N_COEFFS * piece + power) * self.dim + d]
    }

    pub fn total_duration(&self) -> T {
        self.durations.iter().copied().sum()
    }

    /// Start time of every piece plus the final time.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.durations.len() + 1);
        let mut t = T::zero();
        out.push(t);
        for &d in &self.durations {
            t += d;
            out.push(t);
        }
        out
    }

    /// Piece index and local time for a global time; clamps to the last piece
    /// at the final time.
    pub fn locate(&self, t: T) -> (usize, T) {
        let mut rest = t;
        let last = self.durations.len() - 1;
        for (i, &d) in self.durations.iter().enumerate() {
            if rest <= d || i == last {
                return (i, rest.max(T::zero()).min(d));
            }
            rest -= d;
        }
        unreachable!()
    }

    /// Derivative `order` of one dimension of piece `i` at local time `s`.
    #[inline]
    pub fn piece_eval_dim(&self, i: usize, s: T, order: usize, d: usize) -> T {
        let mut acc = T::zero();
        for j in (order..N_COEFFS).rev() {
            acc = acc * s + self.coeff(i, j, d) * T::lit(falling(j, order));
        }
        acc
    }

    /// Derivative `order` of piece `i` at local time `s`.
    pub fn piece_eval(&self, i: usize, s: T, order: usize) -> Vec<T> {
        (0..self.dim).map(|d| self.piece_eval_dim(i, s, order, d)).collect()
    }

    /// Derivative `order` (0 = position) at global time `t`.
    pub fn eval(&self, t: T, order: usize) -> Result<Vec<T>, MincoError> {
        if order > 5 {
            return Err(MincoError::Order(order));
        }
        let total = self.total_duration();
        let slack = total * T::lit(1e-12);
        if !(t >= -slack && t <= total + slack) {
            return Err(MincoError::Domain {
                t: t.to_f64_lossy(),
                total: total.to_f64_lossy(),
            });
        }
        let (i, s) = self.locate(t);
        Ok(self.piece_eval(i, s, order))
    }

    /// ∫‖p⁽³⁾‖² dt over the whole trajectory.
    pub fn control_effort(&self) -> T {
        let mut total = T::zero();
        for i in 0..self.num_pieces() {
            let t = self.durations[i];
            for d in 0..self.dim {
                total += piece_jerk_energy(self.coeff(i, 3, d), self.coeff(i, 4, d), self.coeff(i, 5, d), t);
            }
        }
        total
    }

    /// Partial derivatives of [`Self::control_effort`] with respect to the
    /// coefficients (same layout as `coeffs`) and the piece durations.
    pub fn control_effort_partials(&self) -> (Vec<T>, Vec<T>) {
        let mut gc = vec![T::zero(); self.coeffs.len()];
        let mut gt = vec![T::zero(); self.num_pieces()];
        let l = T::lit;
        for i in 0..self.num_pieces() {
            let t = self.durations[i];
            let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
            let t5 = t4 * t;
            for d in 0..self.dim {
                let (c3, c4, c5) = (self.coeff(i, 3, d), self.coeff(i, 4, d), self.coeff(i, 5, d));
                let base = (N_COEFFS * i) * self.dim + d;
                gc[base + 3 * self.dim] = l(72.0) * c3 * t + l(144.0) * c4 * t2 + l(240.0) * c5 * t3;
                gc[base + 4 * self.dim] = l(144.0) * c3 * t2 + l(384.0) * c4 * t3 + l(720.0) * c5 * t4;
                gc[base + 5 * self.dim] = l(240.0) * c3 * t3 + l(720.0) * c4 * t4 + l(1440.0) * c5 * t5;
                let j3 = l(6.0) * c3 + l(24.0) * c4 * t + l(60.0) * c5 * t2;
                gt[i] += j3 * j3;
            }
        }
        (gc, gt)
    }

    /// Upper bound of `|p⁽ᵏ⁾|` of dimension `d` over piece `i`, from the
    /// coefficient magnitudes.
    pub fn derivative_bound(&self, i: usize, order: usize, d: usize) -> T {
        let t = self.durations[i];
        let mut acc = T::zero();
        for j in (order..N_COEFFS).rev() {
            acc = acc * t + self.coeff(i, j, d).abs() * T::lit(falling(j, order));
        }
        acc
    }

    /// Interval enclosing dimension `d` over piece `i`.
    pub fn value_bounds(&self, i: usize, d: usize) -> (T, T) {
        let t = self.durations[i];
        let mut spread = T::zero();
        for j in (1..N_COEFFS).rev() {
            spread = (spread + self.coeff(i, j, d).abs()) * t;
        }
        let c0 = self.coeff(i, 0, d);
        (c0 - spread, c0 + spread)
    }

    /// Junction positions (all piece boundaries including both ends).
    pub fn knots(&self) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = (0..self.num_pieces()).map(|i| self.piece_eval(i, T::zero(), 0)).collect();
        let last = self.num_pieces() - 1;
        out.push(self.piece_eval(last, self.durations[last], 0));
        out
    }

    /// The same path traversed backwards in time.
    pub fn reversed(&self) -> Self {
        let m = self.num_pieces();
        let mut coeffs = vec![T::zero(); self.coeffs.len()];
        let mut durations = Vec::with_capacity(m);
        for (out_i, i) in (0..m).rev().enumerate() {
            let t = self.durations[i];
            durations.push(t);
            // q(s) = p(T - s): expand each power of (T - s).
            for d in 0..self.dim {
                for j in 0..N_COEFFS {
                    let c = self.coeff(i, j, d);
                    for k in 0..=j {
                        let binom = T::lit(falling(j, k) / falling(k, k));
                        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                        let idx = (N_COEFFS * out_i + k) * self.dim + d;
                        coeffs[idx] += c * binom * sign * t.powi((j - k) as i32);
                    }
                }
            }
        }
        Self {
            dim: self.dim,
            durations,
            coeffs,
        }
    }

    /// Concatenates trajectories of equal dimension back to back.
    pub fn concat(parts: &[Trajectory<T>]) -> Result<Self, MincoError> {
        let dim = parts.first().map(|p| p.dim).unwrap_or(0);
        let mut durations = Vec::new();
        let mut coeffs = Vec::new();
        for p in parts {
            if p.dim != dim {
                return Err(MincoError::Shape {
                    what: "dimension",
                    expected: dim,
                    got: p.dim,
                });
            }
            durations.extend_from_slice(&p.durations);
            coeffs.extend_from_slice(&p.coeffs);
        }
        Self::from_parts(dim, durations, coeffs)
    }

    /// Text form: a `pieces <M> dim <m>` header, then per piece a `T <dur>`
    /// line followed by one `c <6 coefficients>` line per dimension.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "pieces {} dim {}", self.num_pieces(), self.dim);
        for i in 0..self.num_pieces() {
            let _ = writeln!(s, "T {:.16e}", self.durations[i].to_f64_lossy());
            for d in 0..self.dim {
                s.push('c');
                for j in 0..N_COEFFS {
                    let _ = write!(s, " {:.16e}", self.coeff(i, j, d).to_f64_lossy());
                }
                s.push('\n');
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, MincoError> {
        let bad = |line: usize, reason: &str| MincoError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (n0, header) = lines.next().ok_or_else(|| bad(1, "empty document"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "pieces" || h[2] != "dim" {
            return Err(bad(n0 + 1, "expected `pieces <M> dim <m>`"));
        }
        let m: usize = h[1].parse().map_err(|_| bad(n0 + 1, "bad piece count"))?;
        let dim: usize = h[3].parse().map_err(|_| bad(n0 + 1, "bad dimension"))?;
        let mut durations = Vec::with_capacity(m);
        let mut coeffs = vec![T::zero(); m * N_COEFFS * dim];
        let num = |line: usize, s: &str| s.parse::<f64>().map(T::lit).map_err(|_| bad(line, "bad number"));
        for i in 0..m {
            let (n, l) = lines.next().ok_or_else(|| bad(n0 + 1, "truncated document"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 2 || f[0] != "T" {
                return Err(bad(n + 1, "expected `T <duration>`"));
            }
            durations.push(num(n + 1, f[1])?);
            for d in 0..dim {
                let (n, l) = lines.next().ok_or_else(|| bad(n0 + 1, "truncated document"))?;
                let f: Vec<&str> = l.split_whitespace().collect();
                if f.len() != N_COEFFS + 1 || f[0] != "c" {
                    return Err(bad(n + 1, "expected `c` followed by 6 coefficients"));
                }
                for j in 0..N_COEFFS {
                    coeffs[(N_COEFFS * i + j) * dim + d] = num(n + 1, f[j + 1])?;
                }
            }
        }
        if let Some((n, _)) = lines.next() {
            return Err(bad(n + 1, "trailing content"));
        }
        Self::from_parts(dim, durations, coeffs)
    }
}

/// ∫₀ᵀ (p''')² for one dimension of one piece.
#[inline]
pub fn piece_jerk_energy<T: Scalar>(c3: T, c4: T, c5: T, t: T) -> T {
    let l = T::lit;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    l(36.0) * c3 * c3 * t
        + l(144.0) * c3 * c4 * t2
        + (l(192.0) * c4 * c4 + l(240.0) * c3 * c5) * t3
        + l(720.0) * c4 * c5 * t4
        + l(720.0) * c5 * c5 * t5
}

fn check_durations<T: Scalar>(durations: &[T]) -> Result<(), MincoError> {
    if durations.is_empty() {
        return Err(MincoError::Shape {
            what: "durations",
            expected: 1,
            got: 0,
        });
    }
    for (index, &t) in durations.iter().enumerate() {
        if !(t > T::zero()) || !t.is_finite() {
            return Err(MincoError::NonPositiveDuration {
                index,
                value: t.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// Gradient of a scalar cost with respect to the MINCO parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradient<T> {
    /// `(M - 1) × dim`, row-major.
    pub waypoints: Vec<T>,
    pub durations: Vec<T>,
    pub start: Boundary<T>,
    pub end: Boundary<T>,
}

/// A solved MINCO problem: keeps the factorization for gradient propagation.
#[derive(Debug, Clone)]
pub struct Minco<T> {
    dim: usize,
    solver: BandedSolver<T>,
    traj: Trajectory<T>,
}

/// Order of the derivative that each junction row evaluates on the left piece,
/// rows `6i+3 ..= 6i+8`.
const JUNCTION_ORDERS: [usize; 6] = [3, 4, 0, 0, 1, 2];

impl<T: Scalar> Minco<T> {
    /// Builds the minimum-jerk spline through `waypoints` (`(M-1) × dim`,
    /// row-major) with piece `durations` and the given boundary states.
    pub fn construct(
        start: &Boundary<T>,
        end: &Boundary<T>,
        waypoints: &[T],
        durations: &[T],
    ) -> Result<Self, MincoError> {
        check_durations(durations)?;
        let dim = start.dim();
        for (what, b) in [("start boundary", start), ("end boundary", end)] {
            for row in [&b.pos, &b.vel, &b.acc] {
                if row.len() != dim {
                    return Err(MincoError::Shape {
                        what,
                        expected: dim,
                        got: row.len(),
                    });
                }
            }
        }
        let m = durations.len();
        if waypoints.len() != (m - 1) * dim {
            return Err(MincoError::Shape {
                what: "waypoints",
                expected: (m - 1) * dim,
                got: waypoints.len(),
            });
        }
        let n = N_COEFFS * m;
        let mut a = BandedMatrix::zeros(n, 6, 6);
        let mut b = vec![T::zero(); n * dim];
        // Start: p(0), p'(0), p''(0).
        for k in 0..3 {
            a.set(k, k, T::lit(falling(k, k)));
            b[k * dim..(k + 1) * dim].copy_from_slice(start.row(k));
        }
        for i in 0..m - 1 {
            let t = durations[i];
            let r0 = 6 * i + 3;
            let left = N_COEFFS * i;
            let right = N_COEFFS * (i + 1);
            for (offset, &order) in JUNCTION_ORDERS.iter().enumerate() {
                let r = r0 + offset;
                put_derivative_row(&mut a, r, left, order, t);
                if offset != 2 {
                    // Continuity: subtract the right piece's derivative at 0.
                    a.set(r, right + order, -T::lit(falling(order, order)));
                }
            }
            b[(r0 + 2) * dim..(r0 + 3) * dim].copy_from_slice(&waypoints[i * dim..(i + 1) * dim]);
        }
        let t_last = durations[m - 1];
        for k in 0..3 {
            let r = n - 3 + k;
            put_derivative_row(&mut a, r, N_COEFFS * (m - 1), k, t_last);
            b[r * dim..(r + 1) * dim].copy_from_slice(end.row(k));
        }
        let mut solver = BandedSolver::factor(a).map_err(|_| MincoError::Singular)?;
        let coeffs = solver.solve(&b, dim).map_err(|_| MincoError::Singular)?;
        let traj = Trajectory {
            dim,
            durations: durations.to_vec(),
            coeffs,
        };
        Ok(Self { dim, solver, traj })
    }

    pub fn trajectory(&self) -> &Trajectory<T> {
        &self.traj
    }

    pub fn into_trajectory(self) -> Trajectory<T> {
        self.traj
    }

    /// Propagates `∂K/∂c` (coefficient layout) and `∂K/∂T` to the waypoints,
    /// durations and boundary states through the linear construction.
    pub fn gradients(&self, grad_coeffs: &[T], grad_durations: &[T]) -> ParamGradient<T> {
        let dim = self.dim;
        let m = self.traj.num_pieces();
        let n = N_COEFFS * m;
        assert_eq!(grad_coeffs.len(), n * dim, "coefficient gradient shape");
        assert_eq!(grad_durations.len(), m, "duration gradient shape");
        let adj = self.solver.solve_transposed(grad_coeffs, dim);
        let row = |r: usize| &adj[r * dim..(r + 1) * dim];

        let mut waypoints = Vec::with_capacity((m - 1) * dim);
        for i in 0..m - 1 {
            waypoints.extend_from_slice(row(6 * i + 5));
        }
        let boundary = |first: usize| Boundary {
            pos: row(first).to_vec(),
            vel: row(first + 1).to_vec(),
            acc: row(first + 2).to_vec(),
        };

        let mut durations = grad_durations.to_vec();
        for i in 0..m {
            let t = self.traj.durations[i];
            let rows: Vec<(usize, usize)> = if i + 1 < m {
                JUNCTION_ORDERS.iter().enumerate().map(|(o, &k)| (6 * i + 3 + o, k)).collect()
            } else {
                (0..3).map(|k| (n - 3 + k, k)).collect()
            };
            for (r, k) in rows {
                for d in 0..dim {
                    durations[i] -= adj[r * dim + d] * self.traj.piece_eval_dim(i, t, k + 1, d);
                }
            }
        }
        ParamGradient {
            waypoints,
            durations,
            start: boundary(0),
            end: boundary(n - 3),
        }
    }
}

fn put_derivative_row<T: Scalar>(a: &mut BandedMatrix<T>, r: usize, col0: usize, order: usize, t: T) {
    for j in order..N_COEFFS {
        a.set(r, col0 + j, T::lit(falling(j, order)) * t.powi((j - order) as i32));
    }
}

/// Minimum-jerk trajectory through `waypoints` (row-major `(M-1) × dim`).
pub fn construct<T: Scalar>(
    start: &Boundary<T>,
    end: &Boundary<T>,
    waypoints: &[T],
    durations: &[T],
) -> Result<Trajectory<T>, MincoError> {
    Minco::construct(start, end, waypoints, durations).map(Minco::into_trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rng: &mut ChaCha8Rng, m: usize, dim: usize) -> (Boundary<f64>, Boundary<f64>, Vec<f64>, Vec<f64>) {
        let mut v = |n: usize| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let start = Boundary {
            pos: v(dim),
            vel: v(dim),
            acc: v(dim),
        };
        let end = Boundary {
            pos: v(dim),
            vel: v(dim),
            acc: v(dim),
        };
        let wps = v((m - 1) * dim);
        let times = (0..m).map(|_| rng.gen_range(0.5..1.5)).collect();
        (start, end, wps, times)
    }

    #[test]
    fn min_jerk_single_piece() {
        let traj = construct(&Boundary::<f64>::rest(vec![0.0]), &Boundary::<f64>::rest(vec![1.0]), &[], &[1.0]).unwrap();
        let expected = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];
        for (j, e) in expected.iter().enumerate() {
            assert!((traj.coeff(0, j, 0) - e).abs() < 1e-9);
        }
        assert!((traj.eval(0.5, 0).unwrap()[0] - 0.5).abs() < 1e-12);
        assert!((traj.control_effort() - 720.0).abs() < 1e-9);
    }

    #[test]
    fn effort_scaling_law() {
        for &t in &[0.5f64, 1.0, 2.0, 3.0] {
            let traj = construct(&Boundary::<f64>::rest(vec![0.0]), &Boundary::<f64>::rest(vec![1.0]), &[], &[t]).unwrap();
            let expected = 720.0 / t.powi(5);
            assert!(((traj.control_effort() - expected) / expected).abs() < 1e-9);
        }
    }

    #[test]
    fn effort_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (s, e, w, t) = random_problem(&mut rng, 3, 2);
        let traj = construct(&s, &e, &w, &t).unwrap();
        // Composite Simpson on each piece.
        let mut q = 0.0;
        for i in 0..3 {
            let n = 2000;
            let h = t[i] / n as f64;
            for k in 0..=n {
                let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                let j = traj.piece_eval(i, k as f64 * h, 3);
                q += w * h / 3.0 * (j[0] * j[0] + j[1] * j[1]);
            }
        }
        assert!(((traj.control_effort() - q) / q).abs() < 1e-9);
    }

    #[test]
    fn interpolation_and_continuity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let (s, e, w, t) = random_problem(&mut rng, 5, 3);
            let traj = construct(&s, &e, &w, &t).unwrap();
            let bp = traj.breakpoints();
            for i in 0..4 {
                let left = traj.piece_eval(i, t[i], 0);
                for d in 0..3 {
                    assert!((left[d] - w[i * 3 + d]).abs() < 1e-9);
                }
                for order in 0..=4 {
                    let l = traj.piece_eval(i, t[i], order);
                    let r = traj.piece_eval(i + 1, 0.0, order);
                    for d in 0..3 {
                        assert!((l[d] - r[d]).abs() < 1e-8, "order {order}");
                    }
                }
                assert!((traj.eval(bp[i + 1], 0).unwrap()[0] - w[i * 3]).abs() < 1e-9);
            }
            for k in 0..3 {
                let a = traj.eval(0.0, k).unwrap();
                let b = traj.eval(bp[5], k).unwrap();
                for d in 0..3 {
                    assert!((a[d] - s.row(k)[d]).abs() < 1e-9);
                    assert!((b[d] - e.row(k)[d]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn symmetric_two_piece() {
        let traj = construct(&Boundary::<f64>::rest(vec![0.0]), &Boundary::<f64>::rest(vec![2.0]), &[1.0], &[1.0, 1.0]).unwrap();
        for s in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let a = traj.piece_eval(0, s, 0)[0];
            let b = traj.piece_eval(1, 1.0 - s, 0)[0];
            assert!((a + b - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_and_argument_errors() {
        let traj = construct(&Boundary::<f64>::rest(vec![0.0]), &Boundary::<f64>::rest(vec![1.0]), &[], &[1.0]).unwrap();
        assert!(matches!(traj.eval(1.5, 0), Err(MincoError::Domain { .. })));
        assert!(matches!(traj.eval(0.5, 6), Err(MincoError::Order(6))));
        assert!(matches!(
            construct(&Boundary::<f64>::rest(vec![0.0]), &Boundary::<f64>::rest(vec![1.0]), &[], &[0.0]),
            Err(MincoError::NonPositiveDuration { .. })
        ));
        assert!(matches!(
            construct(&Boundary::<f64>::rest(vec![0.0]), &Boundary::<f64>::rest(vec![1.0]), &[0.5], &[1.0]),
            Err(MincoError::Shape { .. })
        ));
    }

    #[test]
    fn stationary_effort_is_zero() {
        let traj = construct(
            &Boundary::<f64>::rest(vec![1.0, 2.0]),
            &Boundary::<f64>::rest(vec![1.0, 2.0]),
            &[1.0, 2.0, 1.0, 2.0],
            &[0.3, 0.7, 1.1],
        )
        .unwrap();
        assert!(traj.control_effort().abs() < 1e-20);
    }

    fn effort_of(s: &Boundary<f64>, e: &Boundary<f64>, w: &[f64], t: &[f64]) -> f64 {
        construct(s, e, w, t).unwrap().control_effort()
    }

    #[test]
    fn effort_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = 1e-6;
        for _ in 0..10 {
            let (s, e, w, t) = random_problem(&mut rng, 4, 2);
            let minco = Minco::construct(&s, &e, &w, &t).unwrap();
            let (gc, gt) = minco.trajectory().control_effort_partials();
            let g = minco.gradients(&gc, &gt);
            for k in 0..w.len() {
                let mut wp = w.clone();
                wp[k] += h;
                let mut wm = w.clone();
                wm[k] -= h;
                let fd = (effort_of(&s, &e, &wp, &t) - effort_of(&s, &e, &wm, &t)) / (2.0 * h);
                assert!((fd - g.waypoints[k]).abs() <= 1e-5 * fd.abs().max(1.0), "waypoint {k}: {fd} vs {}", g.waypoints[k]);
            }
            for k in 0..t.len() {
                let mut tp = t.clone();
                tp[k] += h;
                let mut tm = t.clone();
                tm[k] -= h;
                let fd = (effort_of(&s, &e, &w, &tp) - effort_of(&s, &e, &w, &tm)) / (2.0 * h);
                assert!((fd - g.durations[k]).abs() <= 1e-5 * fd.abs().max(1.0), "time {k}: {fd} vs {}", g.durations[k]);
            }
            let mut sp = s.clone();
            sp.vel[1] += h;
            let mut sm = s.clone();
            sm.vel[1] -= h;
            let fd = (effort_of(&sp, &e, &w, &t) - effort_of(&sm, &e, &w, &t)) / (2.0 * h);
            assert!((fd - g.start.vel[1]).abs() <= 1e-5 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn single_piece_time_gradient_closed_form() {
        for &t in &[0.5f64, 1.0, 2.0] {
            let minco = Minco::construct(&Boundary::<f64>::rest(vec![0.0]), &Boundary::<f64>::rest(vec![1.0]), &[], &[t]).unwrap();
            let (gc, gt) = minco.trajectory().control_effort_partials();
            let g = minco.gradients(&gc, &gt);
            let expected = -5.0 * 720.0 / t.powi(6);
            assert!(((g.durations[0] - expected) / expected).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_gradient_in_zero_out() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (s, e, w, t) = random_problem(&mut rng, 3, 3);
        let minco = Minco::construct(&s, &e, &w, &t).unwrap();
        let g = minco.gradients(&vec![0.0; 3 * 6 * 3], &[0.0; 3]);
        assert!(g.waypoints.iter().chain(&g.durations).all(|v| *v == 0.0));
    }

    #[test]
    fn effort_is_minimal_among_interpolants() {
        // Perturbing the interior junction derivatives while keeping the
        // interpolation conditions never lowers the jerk energy.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (s, e, w, t) = random_problem(&mut rng, 3, 1);
        let opt = construct(&s, &e, &w, &t).unwrap();
        let base = opt.control_effort();
        let knots = opt.knots();
        for _ in 0..200 {
            let mut rates: Vec<[f64; 3]> = Vec::new();
            rates.push([s.pos[0], s.vel[0], s.acc[0]]);
            for i in 1..3 {
                let v = opt.piece_eval(i, 0.0, 1)[0] + rng.gen_range(-0.3..0.3);
                let a = opt.piece_eval(i, 0.0, 2)[0] + rng.gen_range(-0.3..0.3);
                rates.push([knots[i][0], v, a]);
            }
            rates.push([e.pos[0], e.vel[0], e.acc[0]]);
            let parts: Vec<_> = (0..3)
                .map(|i| {
                    let b0 = Boundary {
                        pos: vec![rates[i][0]],
                        vel: vec![rates[i][1]],
                        acc: vec![rates[i][2]],
                    };
                    let b1 = Boundary {
                        pos: vec![rates[i + 1][0]],
                        vel: vec![rates[i + 1][1]],
                        acc: vec![rates[i + 1][2]],
                    };
                    construct(&b0, &b1, &[], &[t[i]]).unwrap()
                })
                .collect();
            let perturbed = Trajectory::concat(&parts).unwrap();
            assert!(perturbed.control_effort() >= base - 1e-9);
        }
    }

    #[test]
    fn reversal_and_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (s, e, w, t) = random_problem(&mut rng, 3, 3);
        let traj = construct(&s, &e, &w, &t).unwrap();
        let rev = traj.reversed();
        let total = traj.total_duration();
        for k in 0..=10 {
            let tt = total * k as f64 / 10.0;
            let a = traj.eval(tt, 0).unwrap();
            let b = rev.eval(total - tt, 0).unwrap();
            for d in 0..3 {
                assert!((a[d] - b[d]).abs() < 1e-9);
            }
        }
        let back = Trajectory::<f64>::parse(&traj.to_text()).unwrap();
        assert_eq!(back, traj);
        assert!(Trajectory::<f64>::parse("pieces 1 dim 1\nT 1\n").is_err());
    }

    #[test]
    fn generic_over_f32() {
        let traj = construct(&Boundary::rest(vec![0.0f32]), &Boundary::rest(vec![1.0f32]), &[], &[1.0f32]).unwrap();
        assert!((traj.coeff(0, 3, 0) - 10.0).abs() < 1e-3);
        assert!((traj.control_effort() - 720.0).abs() < 0.1);
    }
}
