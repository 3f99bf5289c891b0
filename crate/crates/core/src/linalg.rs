//! Small linear solvers for the spline systems: banded LU without pivoting and
//! a dense partial-pivoting fallback.

use crate::scalar::Scalar;

/// Square band matrix with `lower` sub-diagonals and `upper` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    n: usize,
    lower: usize,
    upper: usize,
    // Row-major band storage, row r holds columns r-lower ..= r+upper.
    data: Vec<T>,
}

impl<T: Scalar> BandedMatrix<T> {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![T::zero(); n * (lower + upper + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.lower >= r && c <= r + self.upper, "({r}, {c}) outside band");
        r * (self.lower + self.upper + 1) + (c + self.lower - r)
    }

    #[inline]
    fn in_band(&self, r: usize, c: usize) -> bool {
        c + self.lower >= r && c <= r + self.upper
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        if r < self.n && c < self.n && self.in_band(r, c) {
            self.data[self.slot(r, c)]
        } else {
            T::zero()
        }
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        let s = self.slot(r, c);
        self.data[s] = v;
    }

    fn col_range(&self, r: usize) -> (usize, usize) {
        (r.saturating_sub(self.lower), (r + self.upper).min(self.n - 1))
    }

    /// `y = A x` for an `n × k` row-major right-hand side.
    pub fn mul(&self, x: &[T], k: usize) -> Vec<T> {
        let mut y = vec![T::zero(); self.n * k];
        for r in 0..self.n {
            let (lo, hi) = self.col_range(r);
            for c in lo..=hi {
                let a = self.get(r, c);
                if a != T::zero() {
                    for j in 0..k {
                        y[r * k + j] += a * x[c * k + j];
                    }
                }
            }
        }
        y
    }

    fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n * self.n];
        for r in 0..self.n {
            let (lo, hi) = self.col_range(r);
            for c in lo..=hi {
                d[r * self.n + c] = self.get(r, c);
            }
        }
        d
    }
}

/// LU factors of a band matrix; falls back to dense partial pivoting when the
/// unpivoted elimination hits a tiny pivot or leaves a large residual.
#[derive(Debug, Clone)]
pub struct BandedSolver<T> {
    original: BandedMatrix<T>,
    factors: Factors<T>,
}

#[derive(Debug, Clone)]
enum Factors<T> {
    Banded(BandedMatrix<T>),
    Dense { lu: Vec<T>, perm: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("linear system is singular")]
pub struct SingularError;

impl<T: Scalar> BandedSolver<T> {
    pub fn factor(a: BandedMatrix<T>) -> Result<Self, SingularError> {
        let scale = a.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::lit(64.0);
        let factors = match banded_lu(a.clone(), tiny) {
            Some(lu) => Factors::Banded(lu),
            None => dense_factors(&a)?,
        };
        Ok(Self { original: a, factors })
    }

    pub fn is_banded(&self) -> bool {
        matches!(self.factors, Factors::Banded(_))
    }

    /// Solves `A x = b` for `k` right-hand sides stored row-major (`n × k`).
    pub fn solve(&mut self, b: &[T], k: usize) -> Result<Vec<T>, SingularError> {
        let x = self.solve_with_current(b, k, false);
        if self.is_banded() && !self.residual_ok(&x, b, k) {
            self.factors = dense_factors(&self.original)?;
            return Ok(self.solve_with_current(b, k, false));
        }
        Ok(x)
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transposed(&self, b: &[T], k: usize) -> Vec<T> {
        self.solve_with_current(b, k, true)
    }

    fn residual_ok(&self, x: &[T], b: &[T], k: usize) -> bool {
        let ax = self.original.mul(x, k);
        let bn = b.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let xn = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let an = self.original.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let res = ax
            .iter()
            .zip(b)
            .fold(T::zero(), |m, (p, q)| m.max((*p - *q).abs()));
        res.is_finite() && res <= T::lit(1e3) * T::epsilon() * (an * xn + bn) * T::from_usize_lossy(self.original.n)
    }

    fn solve_with_current(&self, b: &[T], k: usize, transposed: bool) -> Vec<T> {
        match &self.factors {
            Factors::Banded(lu) if !transposed => banded_solve(lu, b, k),
            Factors::Banded(lu) => banded_solve_t(lu, b, k),
            Factors::Dense { lu, perm } if !transposed => dense_solve(lu, perm, self.original.n, b, k),
            Factors::Dense { lu, perm } => dense_solve_t(lu, perm, self.original.n, b, k),
        }
    }
}

fn banded_lu<T: Scalar>(mut a: BandedMatrix<T>, tiny: T) -> Option<BandedMatrix<T>> {
    let n = a.n;
    for k in 0..n {
        let pivot = a.get(k, k);
        if !(pivot.abs() > tiny) {
            return None;
        }
        let r_hi = (k + a.lower).min(n - 1);
        let c_hi = (k + a.upper).min(n - 1);
        for r in k + 1..=r_hi {
            let l = a.get(r, k) / pivot;
            a.set(r, k, l);
            if l == T::zero() {
                continue;
            }
            for c in k + 1..=c_hi {
                let v = a.get(r, c) - l * a.get(k, c);
                a.set(r, c, v);
            }
        }
    }
    Some(a)
}

fn banded_solve<T: Scalar>(lu: &BandedMatrix<T>, b: &[T], k: usize) -> Vec<T> {
    let n = lu.n;
    let mut x = b.to_vec();
    for r in 0..n {
        for c in r.saturating_sub(lu.lower)..r {
            let l = lu.get(r, c);
            for j in 0..k {
                let v = x[c * k + j];
                x[r * k + j] -= l * v;
            }
        }
    }
    for r in (0..n).rev() {
        for c in r + 1..=(r + lu.upper).min(n - 1) {
            let u = lu.get(r, c);
            for j in 0..k {
                let v = x[c * k + j];
                x[r * k + j] -= u * v;
            }
        }
        let d = lu.get(r, r);
        for j in 0..k {
            x[r * k + j] /= d;
        }
    }
    x
}

fn banded_solve_t<T: Scalar>(lu: &BandedMatrix<T>, b: &[T], k: usize) -> Vec<T> {
    // A = L U, so Aᵀ = Uᵀ Lᵀ: forward with Uᵀ, then backward with Lᵀ.
    let n = lu.n;
    let mut x = b.to_vec();
    for r in 0..n {
        for c in r.saturating_sub(lu.upper)..r {
            let u = lu.get(c, r);
            for j in 0..k {
                let v = x[c * k + j];
                x[r * k + j] -= u * v;
            }
        }
        let d = lu.get(r, r);
        for j in 0..k {
            x[r * k + j] /= d;
        }
    }
    for r in (0..n).rev() {
        for c in r + 1..=(r + lu.lower).min(n - 1) {
            let l = lu.get(c, r);
            for j in 0..k {
                let v = x[c * k + j];
                x[r * k + j] -= l * v;
            }
        }
    }
    x
}

fn dense_factors<T: Scalar>(a: &BandedMatrix<T>) -> Result<Factors<T>, SingularError> {
    let n = a.n;
    let mut lu = a.to_dense();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|r| (r, lu[r * n + k].abs()))
            .fold((k, T::zero()), |acc, v| if v.1 > acc.1 { v } else { acc });
        if best == T::zero() || !best.is_finite() {
            return Err(SingularError);
        }
        if p != k {
            for c in 0..n {
                lu.swap(k * n + c, p * n + c);
            }
            perm.swap(k, p);
        }
        let pivot = lu[k * n + k];
        for r in k + 1..n {
            let l = lu[r * n + k] / pivot;
            lu[r * n + k] = l;
            if l != T::zero() {
                for c in k + 1..n {
                    let v = lu[k * n + c];
                    lu[r * n + c] -= l * v;
                }
            }
        }
    }
    Ok(Factors::Dense { lu, perm })
}

fn dense_solve<T: Scalar>(lu: &[T], perm: &[usize], n: usize, b: &[T], k: usize) -> Vec<T> {
    let mut x = vec![T::zero(); n * k];
    for r in 0..n {
        x[r * k..(r + 1) * k].copy_from_slice(&b[perm[r] * k..(perm[r] + 1) * k]);
    }
    for r in 0..n {
        for c in 0..r {
            let l = lu[r * n + c];
            for j in 0..k {
                let v = x[c * k + j];
                x[r * k + j] -= l * v;
            }
        }
    }
    for r in (0..n).rev() {
        for c in r + 1..n {
            let u = lu[r * n + c];
            for j in 0..k {
                let v = x[c * k + j];
                x[r * k + j] -= u * v;
            }
        }
        let d = lu[r * n + r];
        for j in 0..k {
            x[r * k + j] /= d;
        }
    }
    x
}

fn dense_solve_t<T: Scalar>(lu: &[T], perm: &[usize], n: usize, b: &[T], k: usize) -> Vec<T> {
    // P A = L U  ⇒  Aᵀ = Uᵀ Lᵀ P.
    let mut z = b.to_vec();
    for r in 0..n {
        for c in 0..r {
            let u = lu[c * n + r];
            for j in 0..k {
                let v = z[c * k + j];
                z[r * k + j] -= u * v;
            }
        }
        let d = lu[r * n + r];
        for j in 0..k {
            z[r * k + j] /= d;
        }
    }
    for r in (0..n).rev() {
        for c in r + 1..n {
            let l = lu[c * n + r];
            for j in 0..k {
                let v = z[c * k + j];
                z[r * k + j] -= l * v;
            }
        }
    }
    let mut x = vec![T::zero(); n * k];
    for r in 0..n {
        x[perm[r] * k..(perm[r] + 1) * k].copy_from_slice(&z[r * k..(r + 1) * k]);
    }
    x
}
